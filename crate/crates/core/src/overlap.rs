//! Pairwise comparison of two graphs by exact concept string match: node and
//! edge overlap, the intersection graph and per-relation recall, negation
//! statistics, and distributions over externally supplied node annotations.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::concept::{normalize_concept, normalize_text, ConceptId, RelationId};
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, NodeIdx, OnDuplicate, Triple};
use crate::par;

/// Maps every node of `from` to its index in `to`, if present.
pub fn node_mapping(from: &KnowledgeGraph, to: &KnowledgeGraph) -> Vec<Option<NodeIdx>> {
    par::map(from.nodes(), |c| to.node_id(c.as_str()))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn unordered(a: NodeIdx, b: NodeIdx) -> (NodeIdx, NodeIdx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn pair_set(g: &KnowledgeGraph) -> HashSet<(NodeIdx, NodeIdx)> {
    g.edges().iter().map(|e| e.pair()).collect()
}

/// For each edge of `a`: is its unordered endpoint pair linked in `b`?
fn shared_edge_mask(a: &KnowledgeGraph, b: &KnowledgeGraph, a_to_b: &[Option<NodeIdx>]) -> Vec<bool> {
    let b_pairs = pair_set(b);
    par::map(a.edges(), |e| match (a_to_b[e.head as usize], a_to_b[e.tail as usize]) {
        (Some(h), Some(t)) => b_pairs.contains(&unordered(h, t)),
        _ => false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOverlap {
    pub shared_nodes: usize,
    pub frac_of_a: f64,
    pub frac_of_b: f64,
}

pub fn node_overlap(a: &KnowledgeGraph, b: &KnowledgeGraph) -> NodeOverlap {
    let shared = node_mapping(a, b).iter().filter(|m| m.is_some()).count();
    NodeOverlap {
        shared_nodes: shared,
        frac_of_a: ratio(shared, a.node_count()),
        frac_of_b: ratio(shared, b.node_count()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeOverlap {
    /// Distinct unordered head-tail pairs linked in both graphs.
    pub shared_edges_undirected: usize,
    /// Share of `a`'s edges whose unordered pair is linked in `b`.
    pub edge_frac_of_a: f64,
    pub edge_frac_of_b: f64,
    /// Edges of `a` (resp. `b`) with both endpoints among the shared nodes.
    pub a_edges_among_shared_nodes: usize,
    pub b_edges_among_shared_nodes: usize,
}

pub fn edge_overlap(a: &KnowledgeGraph, b: &KnowledgeGraph) -> EdgeOverlap {
    let a_to_b = node_mapping(a, b);
    let b_to_a = node_mapping(b, a);
    let a_mask = shared_edge_mask(a, b, &a_to_b);
    let b_mask = shared_edge_mask(b, a, &b_to_a);

    let shared_pairs: HashSet<(NodeIdx, NodeIdx)> = a
        .edges()
        .iter()
        .zip(&a_mask)
        .filter(|(_, &shared)| shared)
        .map(|(e, _)| e.pair())
        .collect();

    let among = |g: &KnowledgeGraph, map: &[Option<NodeIdx>]| {
        g.edges()
            .iter()
            .filter(|e| map[e.head as usize].is_some() && map[e.tail as usize].is_some())
            .count()
    };

    EdgeOverlap {
        shared_edges_undirected: shared_pairs.len(),
        edge_frac_of_a: ratio(a_mask.iter().filter(|&&s| s).count(), a.edge_count()),
        edge_frac_of_b: ratio(b_mask.iter().filter(|&&s| s).count(), b.edge_count()),
        a_edges_among_shared_nodes: among(a, &a_to_b),
        b_edges_among_shared_nodes: among(b, &b_to_a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub a_nodes: usize,
    pub b_nodes: usize,
    pub a_edges: usize,
    pub b_edges: usize,
    #[serde(flatten)]
    pub nodes: NodeOverlap,
    #[serde(flatten)]
    pub edges: EdgeOverlap,
    /// Edge count of `intersection_graph(a, b)`.
    pub intersection_edges: usize,
}

pub fn overlap_report(a: &KnowledgeGraph, b: &KnowledgeGraph) -> OverlapReport {
    OverlapReport {
        a_nodes: a.node_count(),
        b_nodes: b.node_count(),
        a_edges: a.edge_count(),
        b_edges: b.edge_count(),
        nodes: node_overlap(a, b),
        edges: edge_overlap(a, b),
        intersection_edges: intersection_graph(a, b).edge_count(),
    }
}

/// Edges of `a` whose unordered pair is linked in `b`, keeping `a`'s labels.
pub fn intersection_graph(a: &KnowledgeGraph, b: &KnowledgeGraph) -> KnowledgeGraph {
    let a_to_b = node_mapping(a, b);
    let mask = shared_edge_mask(a, b, &a_to_b);
    let mut out = KnowledgeGraph::new();
    for (e, _) in a.edges().iter().zip(&mask).filter(|(_, &s)| s) {
        out.add_edge(a.node(e.head), a.relation(e.relation), a.node(e.tail), e.weight, OnDuplicate::Accumulate)
            .expect("weights of an existing graph are valid");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRecall {
    pub relation: RelationId,
    pub full_count: usize,
    pub intersection_count: usize,
    /// `f^r`: share of the full graph's edges with this relation.
    pub frequency: f64,
    /// `recall^r = |E_inter(r)| / |E_full(r)|`.
    pub recall: f64,
}

/// Per-relation frequency and recall, sorted by relation label.
pub fn relation_recall(full: &KnowledgeGraph, inter: &KnowledgeGraph) -> Result<Vec<RelationRecall>> {
    let full_counts = full.relation_counts();
    let inter_counts = inter.relation_counts();
    let mut inter_by_label: HashMap<&str, usize> = HashMap::new();
    for (r, &n) in inter_counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let label = inter.relation(r as u32).as_str();
        let Some(fr) = full.relation_id(label) else {
            return Err(KgError::InconsistentInputs(format!(
                "relation {label:?} is not in the full graph"
            )));
        };
        if n > full_counts[fr as usize] {
            return Err(KgError::InconsistentInputs(format!(
                "relation {label:?} has more intersection edges ({n}) than full edges ({})",
                full_counts[fr as usize]
            )));
        }
        inter_by_label.insert(label, n);
    }
    let total = full.edge_count();
    let mut rows: Vec<RelationRecall> = full
        .relations()
        .iter()
        .zip(&full_counts)
        .filter(|(_, &n)| n > 0)
        .map(|(rel, &n)| {
            let i = inter_by_label.get(rel.as_str()).copied().unwrap_or(0);
            RelationRecall {
                relation: rel.clone(),
                full_count: n,
                intersection_count: i,
                frequency: ratio(n, total),
                recall: ratio(i, n),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.relation.cmp(&b.relation));
    Ok(rows)
}

/// Negation markers used to flag negated concepts.
pub const NEGATION_MARKERS: &[&str] = &[
    "no", "not", "none", "nor", "no one", "nobody", "nothing", "neither", "nowhere", "never",
    "hardly", "barely", "scarcely", "non", "without", "fail", "cannot", "cant", "no longer",
    "dont", "wont",
];

pub fn default_markers() -> Vec<ConceptId> {
    NEGATION_MARKERS
        .iter()
        .map(|m| ConceptId::parse(m).expect("bundled markers are normalized"))
        .collect()
}

/// Reads one marker per line; blank and `#` lines are skipped.
pub fn read_markers<R: BufRead>(input: R) -> Result<Vec<ConceptId>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(normalize_concept(trimmed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Marker must occur as a contiguous run of whole tokens.
    #[default]
    Token,
    /// Marker may occur anywhere in the concept string.
    Substring,
}

pub fn contains_marker(concept: &str, marker: &str, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Substring => concept.contains(marker),
        MatchMode::Token => {
            let tokens: Vec<&str> = concept.split(' ').collect();
            let needle: Vec<&str> = marker.split(' ').collect();
            needle.len() <= tokens.len() && tokens.windows(needle.len()).any(|w| w == needle.as_slice())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegationReport {
    pub negated_edges: usize,
    pub total_edges: usize,
    pub fraction: f64,
    pub sample: Vec<Triple>,
}

pub const NEGATION_SAMPLE_SIZE: usize = 20;

/// Counts edges whose head or tail contains any marker.
pub fn negation_stats(g: &KnowledgeGraph, markers: &[ConceptId], mode: MatchMode) -> NegationReport {
    let negated_node = par::map(g.nodes(), |c| {
        markers.iter().any(|m| contains_marker(c.as_str(), m.as_str(), mode))
    });
    let mut negated = 0;
    let mut sample = Vec::new();
    for e in g.edges() {
        if negated_node[e.head as usize] || negated_node[e.tail as usize] {
            negated += 1;
            if sample.len() < NEGATION_SAMPLE_SIZE {
                sample.push(g.triple(e));
            }
        }
    }
    NegationReport {
        negated_edges: negated,
        total_edges: g.edge_count(),
        fraction: ratio(negated, g.edge_count()),
        sample,
    }
}

/// Reads `concept<TAB>tag` lines. Concepts are normalized on read; the first
/// tag seen for a concept wins.
pub fn read_annotations<R: BufRead>(input: R) -> Result<BTreeMap<ConceptId, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| KgError::MalformedRow { line: i + 1, reason: reason.to_owned() };
        let (concept, tag) = line.split_once('\t').ok_or_else(|| malformed("expected concept<TAB>tag"))?;
        let tag = tag.split('\t').next().unwrap_or("").trim();
        if tag.is_empty() {
            return Err(malformed("empty tag"));
        }
        let Ok(concept) = normalize_concept(concept) else { continue };
        out.entry(concept).or_insert_with(|| tag.to_owned());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagFrequency {
    pub tag: String,
    pub count: usize,
    pub fraction: f64,
}

/// Relative frequency of each tag over the annotated concepts, most frequent
/// first (ties by tag name), truncated to `top_k`.
pub fn annotated_distribution<'a, I>(annotations: I, top_k: usize) -> Result<Vec<TagFrequency>>
where
    I: IntoIterator<Item = (&'a ConceptId, &'a String)>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;
    for (_, tag) in annotations {
        *counts.entry(tag.as_str()).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(KgError::EmptyAnnotations);
    }
    let mut rows: Vec<TagFrequency> = counts
        .into_iter()
        .map(|(tag, count)| TagFrequency { tag: tag.to_owned(), count, fraction: ratio(count, total) })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.tag.cmp(&b.tag)));
    rows.truncate(top_k);
    Ok(rows)
}

/// Reads `phrase<TAB>count` lines; phrases are normalized and colliding
/// counts summed.
pub fn read_frequency_table<R: BufRead>(input: R) -> Result<HashMap<String, u64>> {
    let mut out: HashMap<String, u64> = HashMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| KgError::MalformedRow { line: i + 1, reason: reason.to_owned() };
        let (phrase, count) = line.split_once('\t').ok_or_else(|| malformed("expected phrase<TAB>count"))?;
        let count: u64 = count
            .split('\t')
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| malformed("invalid count"))?;
        let phrase = normalize_text(phrase);
        if phrase.is_empty() {
            continue;
        }
        *out.entry(phrase).or_default() += count;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCoverage {
    pub nodes: usize,
    pub found: usize,
    /// Share of the graph's nodes absent from the table (0 for an empty graph).
    pub missing_fraction: f64,
    /// Arithmetic mean count over found nodes; `None` when nothing was found.
    pub mean_frequency: Option<f64>,
}

pub fn corpus_frequency_coverage(g: &KnowledgeGraph, table: &HashMap<String, u64>) -> CorpusCoverage {
    let hits: Vec<Option<u64>> = par::map(g.nodes(), |c| table.get(c.as_str()).copied());
    let found: Vec<u64> = hits.into_iter().flatten().collect();
    let sum: u128 = found.iter().map(|&c| c as u128).sum();
    CorpusCoverage {
        nodes: g.node_count(),
        found: found.len(),
        missing_fraction: if g.node_count() == 0 {
            0.0
        } else {
            1.0 - ratio(found.len(), g.node_count())
        },
        mean_frequency: (!found.is_empty()).then(|| sum as f64 / found.len() as f64),
    }
}
