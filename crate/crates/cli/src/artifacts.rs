//! CSV tables, binary fields and the run manifest.

use crate::error::CliResult;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// A CSV artifact. Rows whose `status` column reads FAIL count as failed
/// assertions.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Table {
        Table { file: file.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.file);
        self.rows.push(row);
    }

    fn status_column(&self) -> Option<usize> {
        self.header.iter().position(|h| *h == "status")
    }

    /// Values of the status column (empty when there is none).
    pub fn statuses(&self) -> Vec<&str> {
        match self.status_column() {
            Some(c) => self.rows.iter().map(|r| r[c].as_str()).collect(),
            None => Vec::new(),
        }
    }

    pub fn count(&self, status: &str) -> usize {
        self.statuses().iter().filter(|s| **s == status).count()
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// PASS or FAIL.
pub fn status(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.to_string()
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Everything an experiment produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub binaries: Vec<(String, Vec<u8>)>,
    /// Human-readable summary lines printed after the run.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn failures(&self) -> usize {
        self.tables.iter().map(|t| t.count("FAIL")).sum()
    }

    pub fn passes(&self) -> usize {
        self.tables.iter().map(|t| t.count("PASS")).sum()
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }
}

#[derive(Debug, Serialize)]
struct ArtifactEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    name: &'a str,
    kind: &'a str,
    seed: u64,
    tol_scale: f64,
    config_sha256: String,
    mide_cli: &'static str,
    mide_core: &'static str,
    passed: usize,
    failed: usize,
    status: String,
    artifacts: Vec<ArtifactEntry>,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Identity of a run recorded next to its artifacts.
pub struct RunInfo<'a> {
    pub name: &'a str,
    pub kind: &'a str,
    pub seed: u64,
    pub tol_scale: f64,
    pub config_text: &'a str,
}

/// Writes every artifact into `dir` (created if needed) followed by
/// manifest.json; returns the manifest path.
pub fn write_outcome(dir: &Path, info: &RunInfo, outcome: &Outcome) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for t in &outcome.tables {
        files.push((t.file.clone(), t.to_bytes()?));
    }
    files.extend(outcome.binaries.iter().cloned());
    for (name, bytes) in &files {
        std::fs::write(dir.join(name), bytes)?;
        entries.push(ArtifactEntry { file: name.clone(), bytes: bytes.len(), sha256: hex_digest(bytes) });
    }
    let failed = outcome.failures();
    let manifest = Manifest {
        name: info.name,
        kind: info.kind,
        seed: info.seed,
        tol_scale: info.tol_scale,
        config_sha256: hex_digest(info.config_text.as_bytes()),
        mide_cli: env!("CARGO_PKG_VERSION"),
        mide_core: mide_core::VERSION,
        passed: outcome.passes(),
        failed,
        status: status(failed == 0),
        artifacts: entries,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
