//! Scenario runner behind the `proxcat` binary.
//!
//! A scenario is a JSON file (see [`config::ScenarioConfig`]) naming a command
//! (`check`, `ppa`, `curve` or `rates`), the spaces and families it applies to,
//! and the sampling and tolerance settings. Running it writes `report.json`,
//! `checks.csv` and any trace CSVs into the output directory and returns a
//! [`RunReport`].

pub mod config;
mod output;
mod runner;

use std::path::PathBuf;

use proxcat_core::checkers::Witness;
use serde::Serialize;

pub use config::{Command, ScenarioConfig};
pub use output::format_number;
pub use runner::{run_config, run_scenario, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] proxcat_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 2 for unusable input or output, 3 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(proxcat_core::Error::NumericFailure(_)) => 3,
            _ => 2,
        }
    }
}

/// Summary of one sampled check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub checked: usize,
    pub pass: bool,
    pub witness: Option<Witness>,
}

/// A bound together with the value it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateLine {
    pub name: String,
    pub eps: Option<f64>,
    /// Decimal string; bounds may exceed 64 bits.
    pub bound: String,
    /// Witness index, first violating index, or computed value.
    pub value: Option<String>,
    pub margin: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub name: String,
    pub command: Command,
    pub seed: Option<u64>,
    pub pass: bool,
    pub checks: Vec<CheckLine>,
    pub rates: Vec<RateLine>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunReport {
    /// One `PASS`/`FAIL` line per check and per rate.
    pub fn summary_lines(&self) -> Vec<String> {
        let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} max_violation={:e} tolerance={:e} samples={}",
                    verdict(c.pass),
                    c.name,
                    c.max_violation,
                    c.tolerance,
                    c.checked
                )
            })
            .collect();
        out.extend(self.rates.iter().map(|r| {
            let mut line = format!("{} {} bound={}", verdict(r.pass), r.name, r.bound);
            if let Some(v) = &r.value {
                line.push_str(&format!(" value={v}"));
            }
            if let Some(m) = r.margin {
                line.push_str(&format!(" margin={m:e}"));
            }
            line
        }));
        out
    }
}
