//! Concept grounding in free text and question-to-answer path retrieval.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::concept::{normalize_text, ConceptId, RelationId};
use crate::graph::{KnowledgeGraph, NodeIdx};

/// Greedy longest-match grounding. At each token position the longest n-gram
/// (up to `max_ngram` tokens) that is a graph node and not made up entirely
/// of stopwords is taken, and the scan resumes after it.
pub fn ground_concepts(
    text: &str,
    kg: &KnowledgeGraph,
    stopwords: &HashSet<String>,
    max_ngram: usize,
) -> BTreeSet<ConceptId> {
    let normalized = normalize_text(text);
    let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
    let mut found = BTreeSet::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=max_ngram.min(tokens.len() - i)).rev().find_map(|n| {
            let window = &tokens[i..i + n];
            if window.iter().all(|t| stopwords.contains(*t)) {
                return None;
            }
            kg.node_id(&window.join(" ")).map(|idx| (n, idx))
        });
        match longest {
            Some((n, idx)) => {
                found.insert(kg.node(idx).clone());
                i += n;
            }
            None => i += 1,
        }
    }
    found
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundedPair {
    pub question_concepts: BTreeSet<ConceptId>,
    pub answer_concepts: BTreeSet<ConceptId>,
}

/// A directed path of one or two edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KgPath {
    pub nodes: Vec<ConceptId>,
    pub relations: Vec<RelationId>,
}

fn ids(kg: &KnowledgeGraph, concepts: &BTreeSet<ConceptId>) -> Vec<NodeIdx> {
    concepts.iter().filter_map(|c| kg.node_id(c.as_str())).collect()
}

/// All simple directed paths with at most `max_hops` (1 or 2) edges from a
/// question concept to a different answer concept, sorted.
///
/// Traversal follows edge direction only, so the graph is expected to be
/// densified with reverse relations first.
pub fn retrieve_paths(gp: &GroundedPair, kg: &KnowledgeGraph, max_hops: usize) -> Vec<KgPath> {
    let answers: HashSet<NodeIdx> = ids(kg, &gp.answer_concepts).into_iter().collect();
    let mut out: BTreeSet<KgPath> = BTreeSet::new();
    for q in ids(kg, &gp.question_concepts) {
        for e1 in kg.out_edges(q) {
            let mid = e1.tail;
            if mid == q {
                continue;
            }
            if max_hops >= 1 && answers.contains(&mid) {
                out.insert(KgPath {
                    nodes: vec![kg.node(q).clone(), kg.node(mid).clone()],
                    relations: vec![kg.relation(e1.relation).clone()],
                });
            }
            if max_hops < 2 {
                continue;
            }
            for e2 in kg.out_edges(mid) {
                let a = e2.tail;
                if a == q || a == mid || !answers.contains(&a) {
                    continue;
                }
                out.insert(KgPath {
                    nodes: vec![kg.node(q).clone(), kg.node(mid).clone(), kg.node(a).clone()],
                    relations: vec![kg.relation(e1.relation).clone(), kg.relation(e2.relation).clone()],
                });
            }
        }
    }
    out.into_iter().collect()
}

/// A QA item: one question and its candidate answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaItem {
    #[serde(deserialize_with = "crate::scriptgraph::id_from_any")]
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundedItem {
    pub id: String,
    pub question_concepts: BTreeSet<ConceptId>,
    /// One concept set per answer, in input order.
    pub answer_concepts: Vec<BTreeSet<ConceptId>>,
}

impl GroundedItem {
    pub fn pairs(&self) -> impl Iterator<Item = GroundedPair> + '_ {
        self.answer_concepts.iter().map(|a| GroundedPair {
            question_concepts: self.question_concepts.clone(),
            answer_concepts: a.clone(),
        })
    }
}

pub fn ground_item(item: &QaItem, kg: &KnowledgeGraph, stopwords: &HashSet<String>, max_ngram: usize) -> GroundedItem {
    GroundedItem {
        id: item.id.clone(),
        question_concepts: ground_concepts(&item.question, kg, stopwords, max_ngram),
        answer_concepts: item
            .answers
            .iter()
            .map(|a| ground_concepts(a, kg, stopwords, max_ngram))
            .collect(),
    }
}
