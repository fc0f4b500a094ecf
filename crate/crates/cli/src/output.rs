//! Run reports: a JSON document or a CSV table, both prefixed with the
//! metadata needed to reproduce the run.

use std::io::Write;
use std::path::Path;

use lao_core::extended::Ext;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::family::SCHEMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Extended real as JSON (`+inf` becomes `"inf"`).
pub fn ext(v: f64) -> Value {
    serde_json::to_value(Ext(v)).expect("extended reals always serialize")
}

pub fn ext_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| ext(*x)).collect())
}

pub fn ext_matrix(m: &[Vec<f64>]) -> Value {
    Value::Array(m.iter().map(|r| ext_vec(r)).collect())
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Number as written in CSV cells.
pub fn cell(v: f64) -> String {
    lao_core::extended::format(v)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub log_base: f64,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub result: Value,
    pub table: Table,
    /// Human-readable notes, echoed to stderr.
    pub warnings: Vec<String>,
}

impl Report {
    pub fn json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "tool": "lao",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "log_base": self.log_base,
            "seed": self.seed,
            "inputs": self.inputs,
            "warnings": self.warnings,
            "result": self.result,
        })
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema: {SCHEMA}\n"));
        out.push_str(&format!("# tool: lao {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# log_base: {}\n", self.log_base));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        out.push_str(&format!("# inputs: {}\n", self.inputs));
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        out.push_str(&csv_line(&self.table.header));
        for row in &self.table.rows {
            out.push_str(&csv_line(row));
        }
        out
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let text = match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
        };
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

fn csv_line(cells: &[String]) -> String {
    let quoted: Vec<String> = cells
        .iter()
        .map(|c| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        })
        .collect();
    format!("{}\n", quoted.join(","))
}
