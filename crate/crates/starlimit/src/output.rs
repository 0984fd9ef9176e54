//! CSV tables and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use starlimit_core::ConvergenceReport;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Reals are written with 17 significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the table is written to `<name>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// A sweep report with optional leading columns repeated on every row.
    pub fn from_report(name: &str, lead: &[(&str, Cell)], report: &ConvergenceReport) -> Self {
        let mut header: Vec<String> = lead.iter().map(|(n, _)| n.to_string()).collect();
        header.extend(report.columns().iter().cloned());
        let mut t = Table::with_header(name, header);
        t.append_report(lead, report);
        t
    }

    pub fn append_report(&mut self, lead: &[(&str, Cell)], report: &ConvergenceReport) {
        for row in report.rows() {
            let mut cells: Vec<Cell> = lead.iter().map(|(_, c)| c.clone()).collect();
            cells.extend(row.iter().map(|&x| Cell::Num(x)));
            self.push(cells);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (n, cell) in row.iter().enumerate() {
                if n > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_real(*x)),
                    Cell::Int(i) => write!(out, "{i}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Column `name` as reals (integers are converted).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Num(x) => *x,
                    Cell::Int(i) => *i as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub subcommand: &'a str,
    pub code_version: &'a str,
    pub config_sha256: String,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<OutputFile>,
    pub config: &'a RunConfig,
}

/// Write every table and the manifest into `dir`; returns the paths written.
pub fn write_run(
    dir: &Path,
    subcommand: &str,
    config: &RunConfig,
    tables: &[Table],
    threads: usize,
    wall_time: f64,
    timings: Vec<(String, f64)>,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut outputs = Vec::new();
    for t in tables {
        let csv = t.to_csv();
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, csv.as_bytes())?;
        outputs.push(OutputFile {
            path: format!("{}.csv", t.name),
            sha256: sha256_hex(csv.as_bytes()),
            rows: t.rows.len(),
        });
        written.push(path);
    }
    let manifest = Manifest {
        subcommand,
        code_version: env!("CARGO_PKG_VERSION"),
        config_sha256: sha256_hex(config.to_json().as_bytes()),
        threads,
        wall_time_seconds: wall_time,
        timings,
        outputs,
        config,
    };
    let path = dir.join(format!("{subcommand}.manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
