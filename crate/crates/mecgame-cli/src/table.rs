//! Typed result tables and the machine-readable status document.
//!
//! Tables carry only values derived from (scenario, seed), so CSV output is
//! byte-identical across reruns; timestamps and wall time live in the JSON
//! status file instead.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::UInt(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Str(s) => write!(f, "{s}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::UInt(v) => serde_json::json!(v),
            Cell::Float(v) if v.is_finite() => serde_json::json!(v),
            Cell::Float(v) => serde_json::json!(v.to_string()),
            Cell::Str(s) => serde_json::json!(s),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: Vec<&'static str>) -> Self {
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row arity mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.to_string(), cell.to_json()))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            })
            .collect();
        serde_json::json!(rows)
    }

    /// Write `<out>/<name>.csv` or `.json` depending on `format`.
    pub fn write(&self, out: &Path, format: OutputFormat) -> Result<std::path::PathBuf> {
        let path = out.join(format!(
            "{}.{}",
            self.name,
            match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            }
        ));
        let body = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Json => serde_json::to_string_pretty(&self.to_json())? + "\n",
        };
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub seed: u64,
    pub timestamp_ms: u128,
}

/// Machine-readable outcome of one command.
#[derive(Debug, Clone, Serialize)]
pub struct StatusReport {
    /// "ok" when every run converged and every validation passed.
    pub status: String,
    /// Largest sweep count across runs (0 for closed forms).
    pub sweeps: usize,
    /// Largest equilibrium residual across runs.
    pub residual: f64,
    pub wall_time_ms: u128,
    pub meta: RunMeta,
}

impl StatusReport {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn write(&self, out: &Path) -> Result<std::path::PathBuf> {
        let path = out.join("status.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
