//! `--set key=value` overrides.
//!
//! Every tunable lives in one of three tables: [`SolverConfig`],
//! [`CheckConfig`] or [`OracleSettings`]. A key is looked up in that order;
//! the value is parsed as JSON (so `1e-9`, `true` and `[0.1,7.3]` all work),
//! a bare comma-separated list is read as an array, and anything else is a
//! string.

use anyhow::{anyhow, bail, Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use walras_core::{CheckConfig, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Lattice subdivisions for the grid oracles; `None` picks one by
    /// dimension (see [`OracleSettings::grid_resolution_for`]).
    pub grid_resolution: Option<usize>,
    pub grid_epsilon: f64,
    pub perron_tol: f64,
    pub perron_max_iters: usize,
    /// `compare` succeeds when every oracle delta is at most this. The grid
    /// oracle is additionally allowed `grid_tol_spacings` lattice spacings.
    pub compare_tol: f64,
    pub grid_tol_spacings: f64,
    /// Independent concurrent starts for `solve`; 1 disables multi-start.
    pub multistart: usize,
    /// Point and trim for `project`.
    pub point: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            grid_resolution: None,
            grid_epsilon: 0.0,
            perron_tol: 1e-14,
            perron_max_iters: 1_000_000,
            compare_tol: 1e-6,
            grid_tol_spacings: 2.0,
            multistart: 1,
            point: None,
            epsilon: None,
        }
    }
}

impl OracleSettings {
    /// Keeps a full lattice sweep well under a second.
    pub fn grid_resolution_for(&self, dim: usize) -> usize {
        self.grid_resolution.unwrap_or(match dim {
            0..=2 => 100_000,
            3 => 1_000,
            _ => 100,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub solver: SolverConfig,
    pub check: CheckConfig,
    pub oracle: OracleSettings,
}

impl Settings {
    pub fn from_overrides(pairs: &[String], seed: Option<u64>) -> Result<Self> {
        let mut solver = to_object(&SolverConfig::default())?;
        let mut check = to_object(&CheckConfig::default())?;
        let mut oracle = to_object(&OracleSettings::default())?;
        for pair in pairs {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects key=value, got {pair:?}"))?;
            let key = key.trim();
            let value = parse_value(raw.trim());
            let mut hit = false;
            for table in [&mut solver, &mut check, &mut oracle] {
                if let Some(slot) = table.get_mut(key) {
                    *slot = value.clone();
                    hit = true;
                }
            }
            if !hit {
                bail!("unknown setting {key:?}");
            }
        }
        if let Some(seed) = seed {
            solver.insert("seed".into(), seed.into());
            check.insert("seed".into(), seed.into());
        }
        Ok(Settings {
            solver: from_object(solver).context("invalid solver setting")?,
            check: from_object(check).context("invalid check setting")?,
            oracle: from_object(oracle).context("invalid oracle setting")?,
        })
    }
}

fn to_object<T: Serialize>(value: &T) -> Result<serde_json::Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(map) => Ok(map),
        _ => unreachable!("settings tables serialize as objects"),
    }
}

fn from_object<T: DeserializeOwned>(map: serde_json::Map<String, Value>) -> Result<T> {
    Ok(serde_json::from_value(Value::Object(map))?)
}

fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str(raw) {
        return v;
    }
    if raw.contains(',') {
        if let Ok(v) = serde_json::from_str(&format!("[{raw}]")) {
            return v;
        }
    }
    Value::String(raw.to_string())
}
