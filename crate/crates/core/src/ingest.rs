//! Parsers for ConceptNet assertion dumps and SWOW cue/response exports.

use std::collections::HashMap;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};

use crate::concept::{normalize_concept, ConceptId, RelationId};
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, OnDuplicate};

pub const ASSOCIATION: &str = "association";
pub const FORWARD_ASSOCIATED: &str = "forwardassociated";
pub const MUTUAL_ASSOCIATED: &str = "mutualassociated";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    /// Rows with too few fields or unparseable values.
    pub rows_malformed: usize,
    /// Rows dropped by a content filter (non-English, `NA`, frequency cutoff).
    pub rows_filtered: usize,
    /// Rows whose head or tail normalized to nothing.
    pub rows_empty_concept: usize,
    /// Accepted rows before deduplication.
    pub raw_triples: usize,
    pub nodes: usize,
    pub edges: usize,
    pub relations: usize,
}

impl IngestReport {
    fn finish(mut self, g: &KnowledgeGraph) -> Self {
        self.nodes = g.node_count();
        self.edges = g.edge_count();
        self.relations = g.relation_count();
        self
    }
}

/// One row of a ConceptNet 5.x assertion dump.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptNetRow<'a> {
    pub assertion_uri: &'a str,
    pub relation_uri: &'a str,
    pub start_uri: &'a str,
    pub end_uri: &'a str,
    pub metadata: &'a str,
}

impl<'a> ConceptNetRow<'a> {
    pub fn parse(line: &'a str) -> Option<Self> {
        let mut fields = line.split('\t');
        let row = ConceptNetRow {
            assertion_uri: fields.next()?,
            relation_uri: fields.next()?,
            start_uri: fields.next()?,
            end_uri: fields.next()?,
            metadata: fields.next().unwrap_or(""),
        };
        let well_formed = row.assertion_uri.starts_with("/a/")
            && row.relation_uri.starts_with("/r/")
            && row.start_uri.starts_with("/c/")
            && row.end_uri.starts_with("/c/");
        well_formed.then_some(row)
    }
}

/// Surface term of an English concept URI: `/c/en/bed_roll/n/wn/...` gives
/// `bed_roll`. Returns `None` for other languages.
pub fn english_term(uri: &str) -> Option<&str> {
    let rest = uri.strip_prefix("/c/en/")?;
    let term = rest.split('/').next().unwrap_or("");
    (!term.is_empty()).then_some(term)
}

/// Last path segment of a relation URI, lowercased: `/r/IsA` gives `isa`.
pub fn relation_label(uri: &str) -> Option<RelationId> {
    let tail = uri.trim_end_matches('/').rsplit('/').next()?;
    RelationId::from_label(tail).ok()
}

/// Builds the English ConceptNet graph. Every deduplicated triple has weight 1.
pub fn parse_conceptnet<R: BufRead>(mut input: R) -> Result<(KnowledgeGraph, IngestReport)> {
    let mut g = KnowledgeGraph::new();
    let mut report = IngestReport::default();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        report.rows_read += 1;
        let Some(row) = ConceptNetRow::parse(line) else {
            report.rows_malformed += 1;
            continue;
        };
        let (Some(start), Some(end)) = (english_term(row.start_uri), english_term(row.end_uri)) else {
            report.rows_filtered += 1;
            continue;
        };
        let Some(relation) = relation_label(row.relation_uri) else {
            report.rows_malformed += 1;
            continue;
        };
        let (Ok(head), Ok(tail)) = (normalize_concept(start), normalize_concept(end)) else {
            report.rows_empty_concept += 1;
            continue;
        };
        report.raw_triples += 1;
        g.add_edge(&head, &relation, &tail, 1.0, OnDuplicate::Keep)?;
    }
    let report = report.finish(&g);
    Ok((g, report))
}

const CUE_COLUMNS: &[&str] = &["cue"];
const RESPONSE_COLUMNS: &[&str] = &["response", "resp"];
const FREQUENCY_COLUMNS: &[&str] = &["r123", "frequency", "freq", "count", "n_response", "r1"];

fn find_column(header: &[String], names: &[&str]) -> Option<usize> {
    names
        .iter()
        .find_map(|name| header.iter().position(|h| h == name))
}

/// Builds the SWOW graph with a single `association` relation. Pairs that
/// collide after normalization have their frequencies summed; pairs whose
/// summed frequency is below `min_freq` are dropped.
pub fn parse_swow<R: Read>(input: R, min_freq: u64) -> Result<(KnowledgeGraph, IngestReport)> {
    let mut input = std::io::BufReader::new(input);
    let mut first = Vec::new();
    input.read_until(b'\n', &mut first)?;
    let header_line = String::from_utf8_lossy(&first);
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };
    let header: Vec<String> = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .from_reader(header_line.as_bytes())
        .records()
        .next()
        .transpose()?
        .map(|rec| rec.iter().map(|h| h.trim().to_lowercase()).collect())
        .unwrap_or_default();

    let cue_col = find_column(&header, CUE_COLUMNS);
    let resp_col = find_column(&header, RESPONSE_COLUMNS);
    let freq_col = find_column(&header, FREQUENCY_COLUMNS);
    let missing: Vec<&str> = [("cue", cue_col), ("response", resp_col), ("frequency", freq_col)]
        .iter()
        .filter(|(_, c)| c.is_none())
        .map(|(n, _)| *n)
        .collect();
    if !missing.is_empty() {
        return Err(KgError::MissingColumns(missing.join(", ")));
    }
    let (cue_col, resp_col, freq_col) = (cue_col.unwrap(), resp_col.unwrap(), freq_col.unwrap());

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut report = IngestReport::default();
    let mut order: Vec<(ConceptId, ConceptId)> = Vec::new();
    let mut counts: HashMap<(ConceptId, ConceptId), u64> = HashMap::new();
    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(_) => {
                report.rows_read += 1;
                report.rows_malformed += 1;
                continue;
            }
        }
        report.rows_read += 1;
        let field = |i: usize| record.get(i).map(String::from_utf8_lossy);
        let (Some(cue), Some(resp), Some(freq)) = (field(cue_col), field(resp_col), field(freq_col)) else {
            report.rows_malformed += 1;
            continue;
        };
        let Ok(freq) = freq.trim().parse::<u64>() else {
            report.rows_malformed += 1;
            continue;
        };
        let resp_trim = resp.trim();
        if resp_trim == "NA" || resp_trim.is_empty() || freq == 0 {
            report.rows_filtered += 1;
            continue;
        }
        let (Ok(cue), Ok(resp)) = (normalize_concept(&cue), normalize_concept(resp_trim)) else {
            report.rows_empty_concept += 1;
            continue;
        };
        report.raw_triples += 1;
        let key = (cue, resp);
        match counts.get_mut(&key) {
            Some(c) => *c += freq,
            None => {
                counts.insert(key.clone(), freq);
                order.push(key);
            }
        }
    }

    let relation = RelationId::new(ASSOCIATION)?;
    let mut g = KnowledgeGraph::new();
    for key in order {
        let freq = counts[&key];
        if freq < min_freq {
            report.rows_filtered += 1;
            continue;
        }
        g.add_edge(&key.0, &relation, &key.1, freq as f64, OnDuplicate::Accumulate)?;
    }
    let report = report.finish(&g);
    Ok((g, report))
}

/// Splits the single `association` relation into `mutualassociated` (the
/// reverse pair also exists) and `forwardassociated`.
pub fn label_swow_relations(g: &KnowledgeGraph) -> Result<KnowledgeGraph> {
    match g.relations() {
        [] => return Ok(KnowledgeGraph::new()),
        [r] if r.as_str() == ASSOCIATION => {}
        rels => {
            let names: Vec<&str> = rels.iter().map(|r| r.as_str()).collect();
            return Err(KgError::UnexpectedRelation(names.join(",")));
        }
    }
    let assoc = 0;
    let forward = RelationId::new(FORWARD_ASSOCIATED)?;
    let mutual = RelationId::new(MUTUAL_ASSOCIATED)?;
    let mut out = KnowledgeGraph::new();
    for n in g.nodes() {
        out.add_node(n);
    }
    for e in g.edges() {
        let label = if g.find_edge(e.tail, assoc, e.head).is_some() { &mutual } else { &forward };
        let r = out.add_relation(label);
        // node indices coincide because all nodes were re-added in order
        out.add_edge_idx(e.head, r, e.tail, e.weight, OnDuplicate::Accumulate);
    }
    Ok(out)
}
