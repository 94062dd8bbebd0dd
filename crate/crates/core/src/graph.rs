//! The relation-labeled, weighted, directed triple store shared by every
//! analysis.
//!
//! Nodes and relations are interned to dense `u32` indices in insertion
//! order. Each distinct `(head, relation, tail)` is stored once; inserting it
//! again accumulates weight. Self-loops are kept and count twice towards the
//! degree of their node.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::concept::{ConceptId, RelationId};
use crate::error::{KgError, Result};

pub type NodeIdx = u32;
pub type RelIdx = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub head: ConceptId,
    pub relation: RelationId,
    pub tail: ConceptId,
    pub weight: f64,
}

impl Triple {
    pub fn new(head: ConceptId, relation: RelationId, tail: ConceptId, weight: f64) -> Self {
        Triple { head, relation, tail, weight }
    }
}

/// An interned edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub head: NodeIdx,
    pub relation: RelIdx,
    pub tail: NodeIdx,
    pub weight: f64,
}

impl Edge {
    /// Unordered endpoint pair, smaller index first.
    pub fn pair(&self) -> (NodeIdx, NodeIdx) {
        if self.head <= self.tail {
            (self.head, self.tail)
        } else {
            (self.tail, self.head)
        }
    }
}

/// What to do when a `(head, relation, tail)` is already present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnDuplicate {
    Accumulate,
    Keep,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    nodes: Vec<ConceptId>,
    node_lookup: HashMap<ConceptId, NodeIdx>,
    relations: Vec<RelationId>,
    relation_lookup: HashMap<RelationId, RelIdx>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(NodeIdx, RelIdx, NodeIdx), u32>,
    out_index: Vec<Vec<u32>>,
    in_index: Vec<Vec<u32>>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.relations == other.relations && self.edges == other.edges
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Result<Self> {
        let mut g = Self::new();
        for t in triples {
            g.add_triple(t)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, concept: &ConceptId) -> NodeIdx {
        if let Some(&idx) = self.node_lookup.get(concept) {
            return idx;
        }
        let idx = self.nodes.len() as NodeIdx;
        self.nodes.push(concept.clone());
        self.node_lookup.insert(concept.clone(), idx);
        self.out_index.push(Vec::new());
        self.in_index.push(Vec::new());
        idx
    }

    pub fn add_relation(&mut self, relation: &RelationId) -> RelIdx {
        if let Some(&idx) = self.relation_lookup.get(relation) {
            return idx;
        }
        let idx = self.relations.len() as RelIdx;
        self.relations.push(relation.clone());
        self.relation_lookup.insert(relation.clone(), idx);
        idx
    }

    pub fn add_triple(&mut self, t: Triple) -> Result<()> {
        self.add_edge(&t.head, &t.relation, &t.tail, t.weight, OnDuplicate::Accumulate)
            .map(|_| ())
    }

    /// Inserts an edge; returns `true` when a new edge was created.
    pub fn add_edge(
        &mut self,
        head: &ConceptId,
        relation: &RelationId,
        tail: &ConceptId,
        weight: f64,
        on_duplicate: OnDuplicate,
    ) -> Result<bool> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(KgError::InvalidWeight(weight));
        }
        let h = self.add_node(head);
        let t = self.add_node(tail);
        let r = self.add_relation(relation);
        Ok(self.add_edge_idx(h, r, t, weight, on_duplicate))
    }

    pub(crate) fn add_edge_idx(
        &mut self,
        head: NodeIdx,
        relation: RelIdx,
        tail: NodeIdx,
        weight: f64,
        on_duplicate: OnDuplicate,
    ) -> bool {
        if let Some(&e) = self.edge_lookup.get(&(head, relation, tail)) {
            if on_duplicate == OnDuplicate::Accumulate {
                self.edges[e as usize].weight += weight;
            }
            return false;
        }
        let e = self.edges.len() as u32;
        self.edges.push(Edge { head, relation, tail, weight });
        self.edge_lookup.insert((head, relation, tail), e);
        self.out_index[head as usize].push(e);
        self.in_index[tail as usize].push(e);
        true
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> &[ConceptId] {
        &self.nodes
    }

    pub fn relations(&self) -> &[RelationId] {
        &self.relations
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: NodeIdx) -> &ConceptId {
        &self.nodes[idx as usize]
    }

    pub fn relation(&self, idx: RelIdx) -> &RelationId {
        &self.relations[idx as usize]
    }

    pub fn node_id(&self, concept: &str) -> Option<NodeIdx> {
        self.node_lookup.get(concept).copied()
    }

    pub fn relation_id(&self, relation: &str) -> Option<RelIdx> {
        self.relation_lookup.get(relation).copied()
    }

    pub fn contains_node(&self, concept: &str) -> bool {
        self.node_lookup.contains_key(concept)
    }

    pub fn find_edge(&self, head: NodeIdx, relation: RelIdx, tail: NodeIdx) -> Option<&Edge> {
        self.edge_lookup
            .get(&(head, relation, tail))
            .map(|&e| &self.edges[e as usize])
    }

    pub fn triple(&self, edge: &Edge) -> Triple {
        Triple {
            head: self.node(edge.head).clone(),
            relation: self.relation(edge.relation).clone(),
            tail: self.node(edge.tail).clone(),
            weight: edge.weight,
        }
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.edges.iter().map(|e| self.triple(e))
    }

    pub fn out_edges(&self, node: NodeIdx) -> impl Iterator<Item = &Edge> + '_ {
        self.out_index[node as usize].iter().map(|&e| &self.edges[e as usize])
    }

    pub fn in_edges(&self, node: NodeIdx) -> impl Iterator<Item = &Edge> + '_ {
        self.in_index[node as usize].iter().map(|&e| &self.edges[e as usize])
    }

    pub fn out_degree_of(&self, node: NodeIdx) -> usize {
        self.out_index[node as usize].len()
    }

    pub fn in_degree_of(&self, node: NodeIdx) -> usize {
        self.in_index[node as usize].len()
    }

    /// Total in + out edge count of a node by index.
    pub fn degree_of(&self, node: NodeIdx) -> usize {
        self.out_degree_of(node) + self.in_degree_of(node)
    }

    /// `|E(e)|`: in-degree plus out-degree. A self-loop contributes 2.
    pub fn degree(&self, concept: &ConceptId) -> Result<usize> {
        self.node_id(concept.as_str())
            .map(|idx| self.degree_of(idx))
            .ok_or_else(|| KgError::UnknownNode(concept.to_string()))
    }

    /// Sorted, deduplicated union of in- and out-neighbor indices.
    pub fn neighbor_ids(&self, node: NodeIdx) -> Vec<NodeIdx> {
        let mut out: Vec<NodeIdx> = self
            .out_edges(node)
            .map(|e| e.tail)
            .chain(self.in_edges(node).map(|e| e.head))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn undirected_neighbors(&self, concept: &ConceptId) -> Result<BTreeSet<ConceptId>> {
        let idx = self
            .node_id(concept.as_str())
            .ok_or_else(|| KgError::UnknownNode(concept.to_string()))?;
        Ok(self.neighbor_ids(idx).into_iter().map(|n| self.node(n).clone()).collect())
    }

    /// Number of edges carrying each relation, indexed by `RelIdx`.
    pub fn relation_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.relations.len()];
        for e in &self.edges {
            counts[e.relation as usize] += 1;
        }
        counts
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::normalize_concept;
    use proptest::prelude::*;

    fn c(s: &str) -> ConceptId {
        normalize_concept(s).unwrap()
    }

    fn r(s: &str) -> RelationId {
        RelationId::new(s).unwrap()
    }

    fn t(h: &str, rel: &str, tl: &str) -> Triple {
        Triple::new(c(h), r(rel), c(tl), 1.0)
    }

    #[test]
    fn add_to_empty_graph() {
        let g = KnowledgeGraph::from_triples([t("a", "rel", "b")]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.relation_count(), 1);
    }

    #[test]
    fn duplicate_accumulates_weight() {
        let g = KnowledgeGraph::from_triples([t("a", "rel", "b"), t("a", "rel", "b")]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].weight, 2.0);
    }

    #[test]
    fn keep_policy_does_not_accumulate() {
        let mut g = KnowledgeGraph::new();
        assert!(g.add_edge(&c("a"), &r("x"), &c("b"), 1.0, OnDuplicate::Keep).unwrap());
        assert!(!g.add_edge(&c("a"), &r("x"), &c("b"), 1.0, OnDuplicate::Keep).unwrap());
        assert_eq!(g.edges()[0].weight, 1.0);
    }

    #[test]
    fn self_loop() {
        let g = KnowledgeGraph::from_triples([t("a", "rel", "a")]).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(&c("a")).unwrap(), 2);
        assert_eq!(g.undirected_neighbors(&c("a")).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_weights() {
        let mut g = KnowledgeGraph::new();
        for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                g.add_edge(&c("a"), &r("x"), &c("b"), w, OnDuplicate::Accumulate),
                Err(KgError::InvalidWeight(_))
            ));
        }
    }

    #[test]
    fn degrees() {
        let mut g = KnowledgeGraph::from_triples([
            t("hub", "x", "a"),
            t("hub", "y", "b"),
            t("c", "x", "hub"),
        ])
        .unwrap();
        g.add_node(&c("lonely"));
        assert_eq!(g.degree(&c("hub")).unwrap(), 3);
        assert_eq!(g.degree(&c("lonely")).unwrap(), 0);
        assert!(matches!(g.degree(&c("missing")), Err(KgError::UnknownNode(_))));
    }

    #[test]
    fn neighbors() {
        let g = KnowledgeGraph::from_triples([t("a", "x", "b")]).unwrap();
        assert_eq!(g.undirected_neighbors(&c("a")).unwrap(), [c("b")].into());
        assert_eq!(g.undirected_neighbors(&c("b")).unwrap(), [c("a")].into());

        let g = KnowledgeGraph::from_triples([t("a", "x", "b"), t("b", "x", "a")]).unwrap();
        assert_eq!(g.undirected_neighbors(&c("a")).unwrap(), [c("b")].into());

        let mut g = KnowledgeGraph::new();
        g.add_node(&c("iso"));
        assert!(g.undirected_neighbors(&c("iso")).unwrap().is_empty());
        assert!(g.undirected_neighbors(&c("nope")).is_err());
    }

    fn small_triples() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
        prop::collection::vec((0u8..12, 0u8..3, 0u8..12), 0..40)
    }

    fn build(raw: &[(u8, u8, u8)]) -> KnowledgeGraph {
        KnowledgeGraph::from_triples(
            raw.iter()
                .map(|&(h, rel, tl)| t(&format!("n{h}"), &format!("r{rel}"), &format!("n{tl}"))),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edge_count(raw in small_triples()) {
            let g = build(&raw);
            let total: usize = (0..g.node_count() as NodeIdx).map(|n| g.degree_of(n)).sum();
            prop_assert_eq!(total, 2 * g.edge_count());
            let out_total: usize = (0..g.node_count() as NodeIdx).map(|n| g.out_degree_of(n)).sum();
            prop_assert_eq!(out_total, g.edge_count());
        }

        #[test]
        fn insertion_is_local(raw in small_triples(), extra in (12u8..20, 0u8..3, 12u8..20)) {
            let g = build(&raw);
            let mut g2 = g.clone();
            g2.add_triple(t(&format!("n{}", extra.0), &format!("r{}", extra.1), &format!("n{}", extra.2))).unwrap();
            for n in g.nodes() {
                prop_assert_eq!(g.degree(n).unwrap(), g2.degree(n).unwrap());
                prop_assert_eq!(g.undirected_neighbors(n).unwrap(), g2.undirected_neighbors(n).unwrap());
            }
        }

        #[test]
        fn indices_match_triples(raw in small_triples()) {
            let g = build(&raw);
            for (i, e) in g.edges().iter().enumerate() {
                prop_assert!(g.out_edges(e.head).any(|x| std::ptr::eq(x, &g.edges()[i])));
                prop_assert!(g.in_edges(e.tail).any(|x| std::ptr::eq(x, &g.edges()[i])));
            }
            let mut distinct: Vec<_> = raw.iter().collect();
            distinct.sort();
            distinct.dedup();
            prop_assert_eq!(distinct.len(), g.edge_count());
        }
    }
}
