use std::io;

use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum KgError {
    #[error("concept {0:?} is empty after normalization")]
    EmptyAfterNormalization(String),
    #[error("{0:?} is not a normalized concept")]
    InvalidConcept(String),
    #[error("{0:?} is not a valid relation label")]
    InvalidRelation(String),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("graph has {0} node(s), at least 2 are required")]
    TooFewNodes(usize),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("missing required column(s): {0}")]
    MissingColumns(String),
    #[error("expected a single `association` relation, found {0:?}")]
    UnexpectedRelation(String),
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("no annotations supplied")]
    EmptyAnnotations,
    #[error("loss became non-finite in epoch {epoch} (last finite loss {last_loss})")]
    NonFiniteLoss { epoch: usize, last_loss: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = KgError> = std::result::Result<T, E>;
