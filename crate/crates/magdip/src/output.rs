//! Fixed-format CSV, matrix files and the run manifest.
//!
//! Floats are written as `{:.16e}` (17 significant digits, scientific, `.`
//! separator) so identical inputs give byte-identical files.
//!
//! Matrix files have one row per composite basis state `|x₁,x₂⟩` in
//! dipole-1-major order. Columns are `row`, `basis`, then `re(<label>)` and
//! `im(<label>)` for every column state, where `<label>` is
//! `<level of dipole 1>:<level of dipole 2>`.

use std::fs;
use std::path::{Path, PathBuf};

use magdip_core::HamiltonianMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::RunError;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Row-buffered CSV file; `finish` writes it and returns the manifest entry.
pub struct CsvTable {
    name: String,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new(name: impl Into<String>, header: &[String]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { name: name.into(), writer }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("writing to memory");
    }

    pub fn finish(self, dir: &Path) -> Result<FileEntry, RunError> {
        let path = dir.join(&self.name);
        let bytes = self.writer.into_inner().map_err(|e| RunError::Io { path: path.clone(), source: e.into_error() })?;
        write_file(dir, &self.name, &bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, RunError> {
    let path: PathBuf = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| RunError::Io { path: parent.to_path_buf(), source: e })?;
    }
    fs::write(&path, bytes).map_err(|e| RunError::Io { path: path.clone(), source: e })?;
    Ok(FileEntry { name: name.to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) })
}

pub fn basis_labels(levels1: &[String], levels2: &[String]) -> Vec<String> {
    levels1.iter().flat_map(|a| levels2.iter().map(move |b| format!("{a}:{b}"))).collect()
}

pub fn matrix_table(name: String, h: &HamiltonianMatrix, labels: &[String]) -> CsvTable {
    let mut header = vec!["row".to_string(), "basis".to_string()];
    for l in labels {
        header.push(format!("re({l})"));
        header.push(format!("im({l})"));
    }
    let mut table = CsvTable::new(name, &header);
    let n = h.dim();
    for (i, label) in labels.iter().enumerate().take(n) {
        let mut fields = vec![i.to_string(), label.clone()];
        for j in 0..n {
            let z = h.get(i, j);
            fields.push(float(z.re));
            fields.push(float(z.im));
        }
        table.row(&fields);
    }
    table
}
