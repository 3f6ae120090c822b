use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nodal_core::specialfun::{Kernels, Quadrature};
use nodal_core::SolverConfig;

#[derive(Debug, Clone, Parser)]
#[command(name = "nodal", version, about = "Minimal-norm potentials with a prescribed Dirichlet node")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve one instance and write the result document and profiles.
    Solve(SolveArgs),
    /// Solve over a grid of node locations.
    Sweep(SweepArgs),
    /// Solve one instance and check every root against the forward solver.
    Verify(SolveArgs),
    /// Minimize the norm directly over piecewise-constant potentials.
    Oracle(OracleArgs),
    /// Eigenvalue and nodes of a sampled potential.
    Forward(ForwardArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Node index, 1 ≤ i < m.
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    /// Eigenfunction index.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Norm exponent, p > 1.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Constant target potential.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    /// Relative bracket width at which root bisection stops.
    #[arg(long)]
    pub tol_root: Option<f64>,
    /// Adaptive quadrature tolerance.
    #[arg(long)]
    pub tol_quad: Option<f64>,
}

impl ToleranceArgs {
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.tol_root {
            cfg.kernels.root_tol = t;
        }
        if let Some(t) = self.tol_quad {
            cfg.kernels.quad = Quadrature::new(t);
        }
        cfg
    }

    pub fn kernels(&self) -> Kernels {
        self.solver_config().kernels
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Node location, 0 < T* < 1.
    #[arg(long = "t-star", allow_negative_numbers = true)]
    pub t_star: f64,
    /// Samples per half-wave of the reconstructed eigenfunction.
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long = "t-min", default_value_t = 0.05, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long = "t-max", default_value_t = 0.95, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long = "t-step", default_value_t = 0.05, allow_negative_numbers = true)]
    pub t_step: f64,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long = "t-star", allow_negative_numbers = true)]
    pub t_star: f64,
    /// Number of piecewise-constant bins.
    #[arg(long, default_value_t = 200)]
    pub bins: usize,
    /// Seed for the initial perturbation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ForwardArgs {
    /// CSV with header `x,q`; a constant `--q0` potential when omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Also report the sensitivity of this node.
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q0: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
