//! Relation conflation schemes and reverse-edge densification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concept::RelationId;
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, OnDuplicate};
use crate::ingest::{FORWARD_ASSOCIATED, MUTUAL_ASSOCIATED};

pub const REVERSE_SUFFIX: &str = "_rev";
pub const GENERIC_RELATION: &str = "related";

const SEVENTEEN_TSV: &str = include_str!("../data/merge17.tsv");
const SEVEN_TSV: &str = include_str!("../data/merge7.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    None,
    Seventeen,
    Seven,
    One,
}

impl FromStr for SchemeName {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "47" | "all" => Ok(SchemeName::None),
            "seventeen" | "17" => Ok(SchemeName::Seventeen),
            "seven" | "7" => Ok(SchemeName::Seven),
            "one" | "1" => Ok(SchemeName::One),
            other => Err(KgError::InvalidConfig(format!("unknown merge scheme {other:?}"))),
        }
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeName::None => "none",
            SchemeName::Seventeen => "seventeen",
            SchemeName::Seven => "seven",
            SchemeName::One => "one",
        })
    }
}

/// A relation-to-group mapping. Relations missing from a table-based scheme
/// are dropped when merging, except the two SWOW labels which map to
/// themselves. A `_rev` relation maps to its base relation's group plus
/// `_rev`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeScheme {
    pub name: SchemeName,
    pub mapping: BTreeMap<RelationId, RelationId>,
}

/// Reads a `relation<TAB>group` table.
pub fn read_scheme_table<R: BufRead>(input: R) -> Result<BTreeMap<RelationId, RelationId>> {
    let mut out = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| KgError::MalformedRow { line: i + 1, reason };
        let (rel, group) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected relation<TAB>group".into()))?;
        let rel = RelationId::from_label(rel).map_err(|e| malformed(e.to_string()))?;
        let group = RelationId::from_label(group).map_err(|e| malformed(e.to_string()))?;
        out.insert(rel, group);
    }
    Ok(out)
}

impl MergeScheme {
    pub fn from_table(name: SchemeName, mapping: BTreeMap<RelationId, RelationId>) -> Self {
        MergeScheme { name, mapping }
    }

    pub fn builtin(name: SchemeName) -> Self {
        let mapping = match name {
            SchemeName::Seventeen => read_scheme_table(SEVENTEEN_TSV.as_bytes()),
            SchemeName::Seven => read_scheme_table(SEVEN_TSV.as_bytes()),
            SchemeName::None | SchemeName::One => Ok(BTreeMap::new()),
        }
        .expect("bundled scheme tables are valid");
        MergeScheme { name, mapping }
    }

    pub fn group_count(&self) -> usize {
        let mut groups: Vec<&RelationId> = self.mapping.values().collect();
        groups.sort();
        groups.dedup();
        groups.len()
    }

    /// Group label for `relation`, or `None` if the scheme drops it.
    pub fn map(&self, relation: &RelationId) -> Option<RelationId> {
        let label = relation.as_str();
        if let Some(base) = label.strip_suffix(REVERSE_SUFFIX) {
            if self.name != SchemeName::None && !base.is_empty() {
                let base = RelationId::new(base).ok()?;
                let group = self.map(&base)?;
                return RelationId::new(&format!("{group}{REVERSE_SUFFIX}")).ok();
            }
        }
        match self.name {
            SchemeName::None => Some(relation.clone()),
            SchemeName::One => Some(RelationId::new(GENERIC_RELATION).expect("valid label")),
            SchemeName::Seventeen | SchemeName::Seven => {
                if let Some(g) = self.mapping.get(relation) {
                    Some(g.clone())
                } else if label == FORWARD_ASSOCIATED || label == MUTUAL_ASSOCIATED {
                    Some(relation.clone())
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    pub edges_in: usize,
    pub edges_out: usize,
    pub relations_out: usize,
    /// Relations with no group under the scheme, with their edge counts.
    pub dropped: BTreeMap<String, usize>,
}

/// Replaces relation labels by group labels; edges whose triples become
/// identical have their weights summed.
pub fn merge_relations(g: &KnowledgeGraph, scheme: &MergeScheme) -> (KnowledgeGraph, MergeReport) {
    let targets: Vec<Option<RelationId>> = g.relations().iter().map(|r| scheme.map(r)).collect();
    let mut out = KnowledgeGraph::new();
    let mut dropped: HashMap<usize, usize> = HashMap::new();
    for e in g.edges() {
        match &targets[e.relation as usize] {
            Some(group) => {
                out.add_edge(g.node(e.head), group, g.node(e.tail), e.weight, OnDuplicate::Accumulate)
                    .expect("weights of an existing graph are valid");
            }
            None => *dropped.entry(e.relation as usize).or_default() += 1,
        }
    }
    let dropped: BTreeMap<String, usize> = dropped
        .into_iter()
        .map(|(r, n)| (g.relations()[r].to_string(), n))
        .collect();
    for (rel, n) in &dropped {
        log::warn!("relation {rel} has no group under scheme {}; dropped {n} edges", scheme.name);
    }
    let report = MergeReport {
        edges_in: g.edge_count(),
        edges_out: out.edge_count(),
        relations_out: out.relation_count(),
        dropped,
    };
    (out, report)
}

pub fn reverse_label(relation: &RelationId) -> RelationId {
    RelationId::new(&format!("{relation}{REVERSE_SUFFIX}")).expect("suffixing keeps a label valid")
}

/// Adds `(t, r_rev, h)` for every `(h, r, t)`, after all original edges.
///
/// A reversed label that already names a relation of `g` gets further
/// suffixes until it is fresh, so densifying twice never merges edges.
pub fn densify_reverse(g: &KnowledgeGraph) -> KnowledgeGraph {
    let mut out = g.clone();
    let mut taken: HashSet<RelationId> = g.relations().iter().cloned().collect();
    let reversed: Vec<u32> = g
        .relations()
        .iter()
        .map(|r| {
            let mut label = reverse_label(r);
            while taken.contains(&label) {
                label = reverse_label(&label);
            }
            taken.insert(label.clone());
            out.add_relation(&label)
        })
        .collect();
    for e in g.edges() {
        out.add_edge_idx(e.tail, reversed[e.relation as usize], e.head, e.weight, OnDuplicate::Accumulate);
    }
    out
}
