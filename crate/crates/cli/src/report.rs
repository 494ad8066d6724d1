//! Report envelope shared by every subcommand, and the trace CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use walras_core::solver::TraceRow;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Default for Tool {
    fn default() -> Self {
        Tool {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconomySource {
    pub path: PathBuf,
    pub dim: usize,
    pub consumers: usize,
    /// Sum of each consumer's preference weights before normalization.
    pub weight_sums: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub tool: Tool,
    pub economy: Option<EconomySource>,
    pub config: Value,
    pub status: String,
    /// Oracles that were skipped and why, plus other non-fatal remarks.
    pub notices: Vec<String>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, economy: Option<EconomySource>, config: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            tool: Tool::default(),
            economy,
            config,
            status: String::new(),
            notices: Vec::new(),
            result: Value::Null,
        }
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        match out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("cannot write report to {}", path.display())),
            None => {
                std::io::stdout().lock().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

pub fn write_trace(path: &Path, dim: usize, rows: &[TraceRow]) -> Result<()> {
    let mut text = String::from("iter");
    for l in 1..=dim {
        text.push_str(&format!(",p_{l}"));
    }
    text.push_str(",fixed_point_residual,clearing_residual\n");
    for row in rows {
        text.push_str(&row.iteration.to_string());
        for v in &row.p {
            text.push_str(&format!(",{v:e}"));
        }
        text.push_str(&format!(
            ",{:e},{:e}\n",
            row.fixed_point_residual, row.clearing_residual
        ));
    }
    std::fs::write(path, text).with_context(|| format!("cannot write trace to {}", path.display()))
}
