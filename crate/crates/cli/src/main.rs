//! `diracl2`: identity suites, minimal-norm solves, Cauchy-kernel scans and
//! refinement sweeps, with JSON or CSV reports.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration,
//! 3 numerical failure (non-convergence, non-finite values), 4 I/O error.

mod config;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Command, Flags, RunConfig};
use run::Outcome;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "diracl2", version, about = "Weighted L2 estimates for the Clifford Dirac operator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run every exact identity suite for one n.
    Verify(Flags),
    /// Minimal-norm solve of D̄u = f with bound reporting.
    Solve(Flags),
    /// Cauchy-kernel weak-defect and monogenicity scan over refinements.
    Kernel(Flags),
    /// Refinement ladder as CSV: identity defect, bound ratio, weak defect.
    Sweep(Flags),
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("DIRACL2_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Config(format!("DIRACL2_THREADS = `{v}`: expected a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn execute(command: Command, flags: &Flags) -> Result<Outcome, CliError> {
    let config = RunConfig::resolve(command, flags)?;
    let finished = match threads()? {
        Some(t) => diracl2::parallel::with_threads(t, || run::run(&config)),
        None => run::run(&config),
    }?;
    match &config.output {
        Some(path) => std::fs::write(path, &finished.text).map_err(|e| CliError::Io(format!("{path}: {e}")))?,
        None => print!("{}", finished.text),
    }
    eprintln!("{}", finished.summary);
    Ok(finished.outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Solve(f) => (Command::Solve, f),
        Sub::Kernel(f) => (Command::Kernel, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    match execute(command, flags) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Ok(Outcome::Numeric) => ExitCode::from(3),
        Err(e) => {
            eprintln!("diracl2: {e}");
            ExitCode::from(e.code())
        }
    }
}
