//! Deterministic dataset writers.
//!
//! Every format is reproducible byte for byte from the same data: CSV
//! cells are rendered with Rust's shortest-roundtrip float formatting,
//! JSON fields keep struct declaration order, and the binary field dump
//! is a fixed little-endian layout. Identical runs therefore produce
//! identical files, which the determinism check relies on.

use crate::outdir::OutputDir;
use crate::Result;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Renders a float the way every writer in this crate does: shortest
/// representation that round-trips, so output is stable across runs.
pub fn fmt_f64(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").expect("formatting to a String cannot fail");
    s
}

/// A CSV table with a fixed header, written in one atomic replace.
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Appends a row of already-rendered cells; panics if the width does
    /// not match the header (a programming error, not a data error).
    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(cells);
    }

    /// Convenience for all-numeric rows.
    pub fn push_floats(&mut self, cells: &[f64]) {
        self.push(cells.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &OutputDir, rel: &str) -> Result<PathBuf> {
        dir.write_atomic(rel, self.render().as_bytes())
    }
}

/// Serializes `value` as pretty JSON with a trailing newline and writes
/// it atomically under `dir`.
pub fn write_json<T: Serialize>(dir: &OutputDir, rel: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::LabError::Io(format!("cannot serialize {rel}: {e}")))?;
    text.push('\n');
    dir.write_atomic(rel, text.as_bytes())
}

/// Binary field dump: magic `HHF1`, then `rows`/`cols` as little-endian
/// `u32`, then row-major `f64` little-endian samples.
pub fn encode_field(rows: u32, cols: u32, samples: &[f64]) -> Vec<u8> {
    assert_eq!(
        samples.len(),
        rows as usize * cols as usize,
        "sample count must match the declared shape"
    );
    let mut out = Vec::with_capacity(12 + samples.len() * 8);
    out.extend_from_slice(b"HHF1");
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for &v in samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Writes a binary field dump atomically under `dir`.
pub fn write_field(
    dir: &OutputDir,
    rel: &str,
    rows: u32,
    cols: u32,
    samples: &[f64],
) -> Result<PathBuf> {
    dir.write_atomic(rel, &encode_field(rows, cols, samples))
}

/// Decodes a binary field dump; used by tests and downstream tooling.
pub fn decode_field(bytes: &[u8]) -> Option<(u32, u32, Vec<f64>)> {
    if bytes.len() < 12 || &bytes[0..4] != b"HHF1" {
        return None;
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().ok()?);
    let cols = u32::from_le_bytes(bytes[8..12].try_into().ok()?);
    let n = rows as usize * cols as usize;
    if bytes.len() != 12 + 8 * n {
        return None;
    }
    let samples = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Some((rows, cols, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn csv_renders_header_and_shortest_floats() {
        let mut t = CsvTable::new(&["t", "value"]);
        t.push_floats(&[0.5, 1.0 / 3.0]);
        t.push_floats(&[1.0, 2.0]);
        assert_eq!(t.render(), "t,value\n0.5,0.3333333333333333\n1,2\n");
    }

    #[test]
    fn field_dump_round_trips() {
        let samples = vec![0.0, 1.5, -2.25, f64::MIN_POSITIVE, 3.0, 4.0];
        let bytes = encode_field(2, 3, &samples);
        assert_eq!(&bytes[0..4], b"HHF1");
        assert_eq!(bytes.len(), 12 + 48);
        let (r, c, back) = decode_field(&bytes).unwrap();
        assert_eq!((r, c), (2, 3));
        assert_eq!(back, samples);
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_none());
    }

    #[test]
    fn writers_are_deterministic_on_disk() {
        let dir = tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let mut t = CsvTable::new(&["a"]);
        t.push_floats(&[core::f64::consts::PI]);
        let p1 = t.write(&out, "x.csv").unwrap();
        let first = std::fs::read(&p1).unwrap();
        t.write(&out, "x.csv").unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), first);
    }
}
