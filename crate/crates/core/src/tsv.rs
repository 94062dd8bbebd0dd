//! Canonical graph format: UTF-8 TSV, one `head\trelation\ttail\tweight`
//! line per triple, `#` comment lines, no header.
//!
//! Triples are written in insertion order and weights use the shortest
//! representation that parses back to the same `f64`, so read-after-write is
//! exact. Isolated nodes have no representation in this format.

use std::io::{BufRead, Write};

use crate::concept::{ConceptId, RelationId};
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, OnDuplicate};

pub fn write_graph<W: Write>(g: &KnowledgeGraph, mut out: W) -> Result<()> {
    for e in g.edges() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            g.node(e.head),
            g.relation(e.relation),
            g.node(e.tail),
            e.weight
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(input: R) -> Result<KnowledgeGraph> {
    let mut g = KnowledgeGraph::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| KgError::MalformedRow { line: lineno, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(malformed(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let head = ConceptId::parse(fields[0]).map_err(|e| malformed(e.to_string()))?;
        let relation = RelationId::new(fields[1]).map_err(|e| malformed(e.to_string()))?;
        let tail = ConceptId::parse(fields[2]).map_err(|e| malformed(e.to_string()))?;
        let weight: f64 = fields[3]
            .parse()
            .map_err(|_| malformed(format!("invalid weight {:?}", fields[3])))?;
        g.add_edge(&head, &relation, &tail, weight, OnDuplicate::Accumulate)
            .map_err(|e| malformed(e.to_string()))?;
    }
    Ok(g)
}
