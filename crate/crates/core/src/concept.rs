//! Concept and relation identifiers.
//!
//! Concepts are identified by their normalized surface string: lowercase,
//! punctuation removed, underscores and whitespace runs collapsed to a single
//! space. Two concepts from different resources are the same node exactly
//! when their normalized strings are equal.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{KgError, Result};

fn is_punctuation(c: char) -> bool {
    c == '\''
        || matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        )
}

/// Lowercases, strips punctuation and collapses whitespace. Digits and
/// symbols are kept. May return an empty string.
pub fn normalize_text(raw: &str) -> String {
    let mut cleaned = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c == '_' {
            cleaned.push(' ');
            continue;
        }
        for lower in c.to_lowercase() {
            // a handful of letters (e.g. U+2102) have no lowercase mapping
            if is_punctuation(lower) || lower.is_uppercase() {
                continue;
            }
            cleaned.push(lower);
        }
    }
    let mut out = String::with_capacity(cleaned.len());
    for token in cleaned.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Normalizes a raw concept string.
pub fn normalize_concept(raw: &str) -> Result<ConceptId> {
    let text = normalize_text(raw);
    if text.is_empty() {
        return Err(KgError::EmptyAfterNormalization(raw.to_owned()));
    }
    Ok(ConceptId(text))
}

fn is_normalized(s: &str) -> bool {
    !s.is_empty() && normalize_text(s) == s
}

/// A normalized concept string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

impl ConceptId {
    /// Accepts `s` only if it is already in normalized form.
    pub fn parse(s: &str) -> Result<Self> {
        if is_normalized(s) {
            Ok(ConceptId(s.to_owned()))
        } else {
            Err(KgError::InvalidConcept(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ')
    }
}

impl TryFrom<String> for ConceptId {
    type Error = KgError;

    fn try_from(s: String) -> Result<Self> {
        if is_normalized(&s) {
            Ok(ConceptId(s))
        } else {
            Err(KgError::InvalidConcept(s))
        }
    }
}

impl From<ConceptId> for String {
    fn from(c: ConceptId) -> String {
        c.0
    }
}

impl Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A relation label such as `isa`, `forwardassociated` or `partof_rev`.
///
/// Labels are lowercase and contain no whitespace; underscores are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RelationId(String);

impl RelationId {
    pub fn new(name: &str) -> Result<Self> {
        let valid = !name.is_empty()
            && !name.chars().any(|c| c.is_whitespace() || c.is_uppercase() || c.is_control());
        if valid {
            Ok(RelationId(name.to_owned()))
        } else {
            Err(KgError::InvalidRelation(name.to_owned()))
        }
    }

    /// Lowercases `raw` before validating it.
    pub fn from_label(raw: &str) -> Result<Self> {
        Self::new(&raw.trim().to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RelationId {
    type Error = KgError;

    fn try_from(s: String) -> Result<Self> {
        RelationId::new(&s)
    }
}

impl From<RelationId> for String {
    fn from(r: RelationId) -> String {
        r.0
    }
}

impl Borrow<str> for RelationId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
