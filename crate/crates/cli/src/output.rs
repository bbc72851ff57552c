//! CSV tables with a reproducibility stamp.

use std::io::Write;

use ris_mimo::SystemConfig;
use sha2::{Digest, Sha256};

use crate::CliError;

/// A header row and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cells of one column parsed as numbers; empty cells become NaN.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let c = self.column(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[c].parse().unwrap_or(f64::NAN)).collect()
    }
}

/// Lowercase hex SHA-256 of the canonical configuration listing.
pub fn config_hash(cfg: &SystemConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.canonical().as_bytes()))
}

/// The comment line written above every table.
pub fn stamp(cfg: &SystemConfig) -> String {
    format!(
        "# ris-mimo {} | seed {} | config sha256 {} | trend-level reproduction: the LoS angle realizations behind the reference figures are unpublished",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        config_hash(cfg)
    )
}

/// Formats a number so that it parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes the stamp, the header and the rows.
pub fn write_csv<W: Write>(mut out: W, cfg: &SystemConfig, table: &Table) -> Result<(), CliError> {
    writeln!(out, "{}", stamp(cfg))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
