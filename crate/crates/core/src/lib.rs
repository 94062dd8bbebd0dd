//! Analysis toolkit for commonsense knowledge graphs and word-association
//! networks.
//!
//! The [`graph::KnowledgeGraph`] triple store is the common substrate. On top
//! of it sit parsers for ConceptNet and SWOW dumps ([`ingest`]), structural
//! statistics ([`metrics`]), pairwise comparison ([`overlap`]), script-graph
//! projection ([`scriptgraph`], [`projection`]), QA-side grounding and path
//! retrieval ([`grounding`], [`merge`]) and TransE relation embeddings
//! ([`transe`]).

pub mod concept;
pub mod error;
pub mod graph;
pub mod grounding;
pub mod ingest;
pub mod lemma;
pub mod merge;
pub mod metrics;
pub mod overlap;
pub mod par;
pub mod projection;
pub mod scriptgraph;
pub mod transe;
pub mod tsv;

pub use concept::{normalize_concept, ConceptId, RelationId};
pub use error::{KgError, Result};
pub use graph::{Edge, KnowledgeGraph, NodeIdx, OnDuplicate, RelIdx, Triple};
