//! Structural statistics of a single graph.
//!
//! `|E|` is always the number of distinct `(head, relation, tail)` triples.
//! Degree of a node is its in-degree plus out-degree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::concept::RelationId;
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, NodeIdx};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_triples: usize,
    pub n_nodes: usize,
    pub n_relations: usize,
    /// `None` when the graph has fewer than two nodes.
    pub density: Option<f64>,
    pub avg_degree: f64,
    /// Natural-log node entropy; `None` for an edgeless graph.
    pub node_entropy: Option<f64>,
}

pub fn graph_stats(g: &KnowledgeGraph) -> GraphStats {
    GraphStats {
        n_triples: g.edge_count(),
        n_nodes: g.node_count(),
        n_relations: g.relation_count(),
        density: density(g).ok(),
        avg_degree: avg_degree(g),
        node_entropy: node_entropy(g).ok(),
    }
}

/// `|E| / (|N| (|N| - 1))` from raw counts.
pub fn density_from_counts(n_edges: usize, n_nodes: usize) -> Result<f64> {
    if n_nodes < 2 {
        return Err(KgError::TooFewNodes(n_nodes));
    }
    let n = n_nodes as f64;
    Ok(n_edges as f64 / (n * (n - 1.0)))
}

pub fn density(g: &KnowledgeGraph) -> Result<f64> {
    density_from_counts(g.edge_count(), g.node_count())
}

/// `|E| / |N|`, zero for the empty graph.
pub fn avg_degree_from_counts(n_edges: usize, n_nodes: usize) -> f64 {
    if n_nodes == 0 {
        0.0
    } else {
        n_edges as f64 / n_nodes as f64
    }
}

pub fn avg_degree(g: &KnowledgeGraph) -> f64 {
    avg_degree_from_counts(g.edge_count(), g.node_count())
}

/// `H_N = sum_e -P(e) ln P(e)` with `P(e) = |E(e)| / |E|`.
///
/// Each edge is incident on two node slots, so the `P(e)` sum to 2 and the
/// entropy can exceed `ln |N|`.
pub fn node_entropy(g: &KnowledgeGraph) -> Result<f64> {
    if g.is_empty() {
        return Err(KgError::EmptyGraph);
    }
    let total = g.edge_count() as f64;
    Ok(par::stable_sum(g.node_count(), |i| {
        let d = g.degree_of(i as NodeIdx);
        if d == 0 {
            0.0
        } else {
            let p = d as f64 / total;
            -p * p.ln()
        }
    }))
}

/// `f^r = |E(r)| / |E|` for every relation.
pub fn relation_distribution(g: &KnowledgeGraph) -> Result<BTreeMap<RelationId, f64>> {
    if g.is_empty() {
        return Err(KgError::EmptyGraph);
    }
    let total = g.edge_count() as f64;
    Ok(g.relation_counts()
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(r, n)| (g.relation(r as u32).clone(), n as f64 / total))
        .collect())
}
