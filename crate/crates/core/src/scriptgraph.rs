//! Script graphs built from SRL frames of a narrative.
//!
//! Each surviving predicate, ARG0 and ARG1 span becomes a node; every frame
//! links its predicate to its arguments. Edges are undirected and stored with
//! the lexicographically smaller endpoint first.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Deserializer, Serialize};

use crate::concept::ConceptId;
use crate::error::{KgError, Result};
use crate::lemma::{canonical_span, Lemmatizer, SpanRole};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrlFrame {
    pub predicate: String,
    #[serde(default)]
    pub arg0: Option<String>,
    #[serde(default)]
    pub arg1: Option<String>,
}

pub(crate) fn id_from_any<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

/// One line of the SRL input: a narrative id and its frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    #[serde(deserialize_with = "id_from_any")]
    pub id: String,
    pub frames: Vec<SrlFrame>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptGraph {
    #[serde(deserialize_with = "id_from_any")]
    pub id: String,
    pub nodes: BTreeSet<ConceptId>,
    pub edges: BTreeSet<(ConceptId, ConceptId)>,
}

impl ScriptGraph {
    fn link(&mut self, a: ConceptId, b: ConceptId) {
        if a == b {
            return;
        }
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        if a < b {
            self.edges.insert((a, b));
        } else {
            self.edges.insert((b, a));
        }
    }
}

pub fn build_script_graph(
    id: &str,
    frames: &[SrlFrame],
    stopwords: &HashSet<String>,
    lemmatizer: &Lemmatizer,
) -> ScriptGraph {
    let mut g = ScriptGraph { id: id.to_owned(), ..Default::default() };
    let canon = |span: &str, role| {
        canonical_span(span, role, stopwords, lemmatizer).and_then(|s| ConceptId::parse(&s).ok())
    };
    for frame in frames {
        let Some(pred) = canon(&frame.predicate, SpanRole::Predicate) else { continue };
        g.nodes.insert(pred.clone());
        for arg in [&frame.arg0, &frame.arg1].into_iter().flatten() {
            if let Some(arg) = canon(arg, SpanRole::Argument) {
                g.link(pred.clone(), arg);
            }
        }
    }
    g
}

pub fn read_narratives<R: BufRead>(input: R) -> Result<Vec<Narrative>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n: Narrative = serde_json::from_str(&line).map_err(|e| KgError::MalformedRow {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if n.frames.iter().any(|f| f.predicate.trim().is_empty()) {
            return Err(KgError::MalformedRow { line: i + 1, reason: "empty predicate".into() });
        }
        out.push(n);
    }
    Ok(out)
}

/// Reads script graphs, one JSON object per line, checking that every edge
/// endpoint is a listed node.
pub fn read_script_graphs<R: BufRead>(input: R) -> Result<Vec<ScriptGraph>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| KgError::MalformedRow { line: i + 1, reason };
        let g: ScriptGraph = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if g.edges.iter().any(|(a, b)| !g.nodes.contains(a) || !g.nodes.contains(b)) {
            return Err(malformed("edge endpoint missing from node list".into()));
        }
        out.push(g);
    }
    Ok(out)
}
