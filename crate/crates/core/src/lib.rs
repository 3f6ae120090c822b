//! Reconstruction of the potential closest in `L^p` to a constant target
//! among all Sturm–Liouville potentials whose `(i, m)`-th Dirichlet node sits
//! at a prescribed location.
//!
//! The pipeline is:
//!
//! 1. [`critical`] reduces the problem to one scalar balance equation in the
//!    eigenvalue and solves it, giving the characteristic parameters.
//! 2. [`reconstruct`] tiles the scaled eigenfunction from its first
//!    integrals and maps it to the optimal potential.
//! 3. [`forward`] solves the direct eigenproblem for any sampled potential
//!    and checks the round trip; [`oracle`] minimizes the norm directly over
//!    piecewise-constant potentials as an independent cross-check.

pub mod critical;
pub mod error;
pub mod forward;
mod ode;
pub mod oracle;
pub mod profile;
pub mod reconstruct;
mod sign;
pub mod specialfun;

pub use critical::{CriticalParams, NodalSolution, ProblemSpec, SolverConfig};
pub use error::{Error, Result};
pub use forward::{EigenSolution, ForwardConfig, NodeSensitivity};
pub use oracle::{OracleConfig, OracleResult, OracleStep};
pub use profile::PotentialProfile;
pub use reconstruct::{QuarterWave, WaveProfile};
pub use sign::Sign;
