use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub tool_version: String,
    pub timestamp: String,
    /// Row counts and other small facts a command wants on record.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, serde_json::Value>,
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Tracks what a command reads and writes, then emits the manifest.
pub struct Recorder {
    command: String,
    parameters: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    notes: BTreeMap<String, serde_json::Value>,
}

impl Recorder {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        Recorder { command: command.to_owned(), parameters, inputs: Vec::new(), outputs: Vec::new(), notes: BTreeMap::new() }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_owned());
    }

    pub fn note<V: Serialize>(&mut self, key: &str, value: V) {
        self.notes.insert(key.to_owned(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    /// File writer for `path`, or stdout when `path` is `None`.
    pub fn output(&mut self, path: Option<&Path>) -> Result<Box<dyn Write>> {
        match path {
            Some(p) => {
                self.outputs.push(p.to_owned());
                let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout()))),
        }
    }

    fn default_path(&self) -> PathBuf {
        match self.outputs.first() {
            Some(out) => {
                let mut name = out.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            }
            None => PathBuf::from(format!("kg-probe-{}.manifest.json", self.command)),
        }
    }

    pub fn finish(self, manifest_path: Option<&Path>) -> Result<PathBuf> {
        let digest = |paths: &[PathBuf]| -> Result<Vec<FileDigest>> {
            paths
                .iter()
                .map(|p| {
                    let sha256 = sha256_file(p).with_context(|| format!("cannot hash {}", p.display()))?;
                    Ok(FileDigest { path: p.display().to_string(), sha256 })
                })
                .collect()
        };
        let path = manifest_path.map(Path::to_owned).unwrap_or_else(|| self.default_path());
        let manifest = RunManifest {
            command: self.command.clone(),
            parameters: self.parameters.clone(),
            inputs: digest(&self.inputs)?,
            outputs: digest(&self.outputs)?,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            notes: self.notes,
        };
        let mut f = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
        serde_json::to_writer_pretty(&mut f, &manifest)?;
        writeln!(f)?;
        f.flush()?;
        Ok(path)
    }
}
