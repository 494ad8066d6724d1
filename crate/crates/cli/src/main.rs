//! `walras`: solve, check and cross-validate exchange economies.
//!
//! Exit codes: 0 success, 1 input error, 2 solver non-convergence or
//! boundary-trapped (also oracle disagreement in `compare`), 3 assumption
//! failure.

mod commands;
mod report;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "walras",
    version,
    about = "Walrasian equilibrium prices for exchange economies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find and certify equilibrium prices.
    Solve(CommonArgs),
    /// Run the numeric assumption checks on an economy.
    Check(CommonArgs),
    /// Project a point onto a trimmed simplex (`--point`, `--epsilon`).
    Project(CommonArgs),
    /// Run the reference oracles on an economy.
    Oracle(CommonArgs),
    /// Solve and compare against every applicable oracle.
    Compare(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Economy specification (JSON).
    #[arg(long)]
    pub economy: Option<PathBuf>,
    /// Override a setting, e.g. `--set damping=0.25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-iteration trajectory as CSV (`solve` only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Point to project, comma separated (`project` only).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    /// Trim of the simplex (`project` only).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

/// Failure carrying its exit code.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: commands::EXIT_INPUT,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => commands::cmd_solve(args),
        Command::Check(args) => commands::cmd_check(args),
        Command::Project(args) => commands::cmd_project(args),
        Command::Oracle(args) => commands::cmd_oracle(args),
        Command::Compare(args) => commands::cmd_compare(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
