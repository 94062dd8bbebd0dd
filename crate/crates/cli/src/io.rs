use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use flate2::read::MultiGzDecoder;
use kg_probe_core::{tsv, KnowledgeGraph};

use crate::manifest::Recorder;

pub const DATA_DIR_VAR: &str = "KGPROBE_DATA_DIR";

/// `path` as given if it exists, otherwise relative to `KGPROBE_DATA_DIR`
/// when that resolves.
pub fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_owned();
    }
    if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_owned()
}

/// Opens an input, transparently decompressing `.gz`, and records it.
pub fn open(rec: &mut Recorder, path: &Path) -> Result<Box<dyn BufRead>> {
    let path = resolve(path);
    let file = File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    rec.input(&path);
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 20, reader)))
}

pub fn read_graph(rec: &mut Recorder, path: &Path) -> Result<KnowledgeGraph> {
    let input = open(rec, path)?;
    tsv::read_graph(input).with_context(|| format!("reading graph {}", path.display()))
}

/// Six significant digits, `%g` style.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
