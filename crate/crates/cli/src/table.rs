//! Minimal CSV output: a header row, comma separators, LF line endings,
//! and floats in Rust's shortest round-trip form (always a `.` decimal
//! separator). Identical rows therefore serialize to identical bytes,
//! which is what makes rerun outputs byte-comparable.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

/// An in-memory table written out as one CSV file.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Write `<dir>/<name>`, creating the directory if needed, and return
    /// the path written.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let path = dir.join(name);
        let file = std::fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(path)
    }
}

/// Shortest decimal form that parses back to exactly the same value.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}
