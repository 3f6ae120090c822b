//! Command-line surface over `nodal-core`: solve, sweep, verify, oracle and
//! forward runs with plain-text and CSV artifacts.

pub mod args;
mod commands;
pub mod output;

use thiserror::Error;

pub use args::{Cli, Command};
pub use commands::{
    check_candidate, read_profile, run_forward, run_oracle, run_solve, run_sweep, run_verify, sweep_grid,
    sweep_rows, Checks, Report, SweepRow, Tolerances,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nodal_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
            CliError::Config(_) | CliError::Csv(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Verify(a) => run_verify(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Forward(a) => run_forward(a),
    }
}
