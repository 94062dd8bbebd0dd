//! Projection of script-graph edges onto a knowledge graph: exact string
//! lookup of both endpoints followed by an undirected shortest-path search.
//!
//! Among equally short paths the lexicographically smallest node sequence
//! (compared from the source) is returned. Breadth-first search achieves this
//! by expanding neighbors in string order and keeping the first parent found.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::concept::ConceptId;
use crate::graph::{KnowledgeGraph, NodeIdx};
use crate::par;
use crate::scriptgraph::ScriptGraph;

pub const DEFAULT_MAX_DEPTH: usize = 10;

/// Undirected adjacency in CSR form, neighbors sorted by concept string,
/// self-loops dropped.
#[derive(Debug, Clone)]
pub struct UndirectedCsr {
    offsets: Vec<usize>,
    neighbors: Vec<NodeIdx>,
}

impl UndirectedCsr {
    pub fn new(g: &KnowledgeGraph) -> Self {
        let n = g.node_count();
        let mut order: Vec<NodeIdx> = (0..n as NodeIdx).collect();
        order.sort_unstable_by(|&a, &b| g.node(a).cmp(g.node(b)));
        let mut rank = vec![0u32; n];
        for (r, &node) in order.iter().enumerate() {
            rank[node as usize] = r as u32;
        }

        let mut lists = par::map_range(n, |u| {
            let mut v: Vec<NodeIdx> = g.neighbor_ids(u as NodeIdx);
            v.retain(|&x| x as usize != u);
            v
        });
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for list in &mut lists {
            list.sort_unstable_by_key(|&x| rank[x as usize]);
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        UndirectedCsr { offsets, neighbors }
    }

    pub fn neighbors(&self, u: NodeIdx) -> &[NodeIdx] {
        &self.neighbors[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Reusable visited-marks for repeated searches on one graph.
#[derive(Debug, Clone)]
pub struct BfsScratch {
    stamp: Vec<u32>,
    parent: Vec<NodeIdx>,
    generation: u32,
    frontier: Vec<NodeIdx>,
    next: Vec<NodeIdx>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        BfsScratch { stamp: vec![0; n], parent: vec![0; n], generation: 0, frontier: Vec::new(), next: Vec::new() }
    }

    fn reset(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }
}

/// Shortest undirected path from `src` to `dst` with at most `max_depth`
/// edges, as a node sequence including both endpoints.
pub fn shortest_path(
    csr: &UndirectedCsr,
    src: NodeIdx,
    dst: NodeIdx,
    max_depth: usize,
    scratch: &mut BfsScratch,
) -> Option<Vec<NodeIdx>> {
    if src == dst {
        return Some(vec![src]);
    }
    scratch.reset();
    let gen = scratch.generation;
    scratch.stamp[src as usize] = gen;
    scratch.frontier.clear();
    scratch.frontier.push(src);
    for _ in 0..max_depth {
        scratch.next.clear();
        for i in 0..scratch.frontier.len() {
            let u = scratch.frontier[i];
            for &v in csr.neighbors(u) {
                if scratch.stamp[v as usize] == gen {
                    continue;
                }
                scratch.stamp[v as usize] = gen;
                scratch.parent[v as usize] = u;
                if v == dst {
                    let mut path = vec![dst];
                    let mut cur = dst;
                    while cur != src {
                        cur = scratch.parent[cur as usize];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                scratch.next.push(v);
            }
        }
        if scratch.next.is_empty() {
            return None;
        }
        std::mem::swap(&mut scratch.frontier, &mut scratch.next);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionStatus {
    Found,
    NoPath,
    HeadMissing,
    TailMissing,
    BothMissing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub pair: (ConceptId, ConceptId),
    pub status: ProjectionStatus,
    /// Endpoints actually looked up, when the head-word fallback replaced one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<(ConceptId, ConceptId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<ConceptId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionOptions {
    pub max_depth: usize,
    /// Retry a missing multiword span with its last (head) word.
    pub head_fallback: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { max_depth: DEFAULT_MAX_DEPTH, head_fallback: false }
    }
}

/// A knowledge graph prepared for repeated pair projections.
pub struct Projector<'g> {
    kg: &'g KnowledgeGraph,
    csr: UndirectedCsr,
    options: ProjectionOptions,
}

impl<'g> Projector<'g> {
    pub fn new(kg: &'g KnowledgeGraph, options: ProjectionOptions) -> Self {
        Projector { kg, csr: UndirectedCsr::new(kg), options }
    }

    pub fn scratch(&self) -> BfsScratch {
        BfsScratch::new(self.kg.node_count())
    }

    fn lookup(&self, c: &ConceptId) -> Option<(NodeIdx, ConceptId)> {
        if let Some(i) = self.kg.node_id(c.as_str()) {
            return Some((i, c.clone()));
        }
        if self.options.head_fallback {
            let head = c.as_str().rsplit(' ').next()?;
            if head != c.as_str() {
                let i = self.kg.node_id(head)?;
                return Some((i, self.kg.node(i).clone()));
            }
        }
        None
    }

    pub fn project_with(&self, head: &ConceptId, tail: &ConceptId, scratch: &mut BfsScratch) -> ProjectionResult {
        let pair = (head.clone(), tail.clone());
        let (h, t) = match (self.lookup(head), self.lookup(tail)) {
            (Some(h), Some(t)) => (h, t),
            (None, None) => return missing(pair, ProjectionStatus::BothMissing),
            (None, _) => return missing(pair, ProjectionStatus::HeadMissing),
            (_, None) => return missing(pair, ProjectionStatus::TailMissing),
        };
        let resolved = (h.1 != *head || t.1 != *tail).then(|| (h.1.clone(), t.1.clone()));
        match shortest_path(&self.csr, h.0, t.0, self.options.max_depth, scratch) {
            Some(nodes) => ProjectionResult {
                pair,
                status: ProjectionStatus::Found,
                resolved,
                length: Some(nodes.len() - 1),
                path: Some(nodes.into_iter().map(|n| self.kg.node(n).clone()).collect()),
            },
            None => ProjectionResult { resolved, ..missing(pair, ProjectionStatus::NoPath) },
        }
    }

    pub fn project(&self, head: &ConceptId, tail: &ConceptId) -> ProjectionResult {
        self.project_with(head, tail, &mut self.scratch())
    }
}

fn missing(pair: (ConceptId, ConceptId), status: ProjectionStatus) -> ProjectionResult {
    ProjectionResult { pair, status, resolved: None, path: None, length: None }
}

/// One-off projection. Prefer [`Projector`] for many pairs.
pub fn project_pair(head: &ConceptId, tail: &ConceptId, kg: &KnowledgeGraph) -> ProjectionResult {
    Projector::new(kg, ProjectionOptions::default()).project(head, tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeProjection {
    pub narrative: String,
    #[serde(flatten)]
    pub result: ProjectionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub length: usize,
    pub count: usize,
    /// Share of found pairs with this length.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthDistribution {
    pub total_pairs: usize,
    pub found_pairs: usize,
    pub coverage: f64,
    pub mean_length: Option<f64>,
    pub histogram: Vec<LengthBin>,
}

impl LengthDistribution {
    pub fn from_results<'a, I: IntoIterator<Item = &'a ProjectionResult>>(results: I) -> Self {
        let mut total = 0;
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for r in results {
            total += 1;
            if let Some(len) = r.length {
                *counts.entry(len).or_default() += 1;
            }
        }
        let found: usize = counts.values().sum();
        let length_sum: usize = counts.iter().map(|(l, c)| l * c).sum();
        LengthDistribution {
            total_pairs: total,
            found_pairs: found,
            coverage: if total == 0 { 0.0 } else { found as f64 / total as f64 },
            mean_length: (found > 0).then(|| length_sum as f64 / found as f64),
            histogram: counts
                .into_iter()
                .map(|(length, count)| LengthBin { length, count, fraction: count as f64 / found as f64 })
                .collect(),
        }
    }
}

/// Projects every edge of every script graph. Results are ordered by
/// narrative id, then pair.
pub fn project_narratives(graphs: &[ScriptGraph], projector: &Projector<'_>) -> Vec<NarrativeProjection> {
    let mut order: Vec<&ScriptGraph> = graphs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let jobs: Vec<(&str, &ConceptId, &ConceptId)> = order
        .iter()
        .flat_map(|g| g.edges.iter().map(move |(a, b)| (g.id.as_str(), a, b)))
        .collect();
    par::map_init(&jobs, || projector.scratch(), |scratch, &(id, a, b)| NarrativeProjection {
        narrative: id.to_owned(),
        result: projector.project_with(a, b, scratch),
    })
}

pub fn path_length_distribution(graphs: &[ScriptGraph], kg: &KnowledgeGraph, options: ProjectionOptions) -> (Vec<NarrativeProjection>, LengthDistribution) {
    let projector = Projector::new(kg, options);
    let results = project_narratives(graphs, &projector);
    let dist = LengthDistribution::from_results(results.iter().map(|r| &r.result));
    (results, dist)
}
