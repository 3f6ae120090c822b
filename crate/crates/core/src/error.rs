use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every solver stage.
///
/// Callers that need to map failures to process exit codes should use
/// [`Error::is_domain`]: domain errors are bad input, everything else is a
/// numerical failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),

    #[error("target {target} outside attainable range [{lo}, {hi}]: {bound}")]
    Range {
        target: f64,
        lo: f64,
        hi: f64,
        bound: &'static str,
    },

    /// An inversion left its feasible range while evaluating the balance
    /// function. `sign` is the sign the balance function takes past that wall.
    #[error("balance function evaluated past the feasibility wall (sign {sign})")]
    BracketBoundary { sign: i8 },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("ODE step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("grids are not aligned: {0}")]
    Misaligned(String),

    #[error("optimizer stalled after {halvings} step halvings at iteration {iteration} (constraint residual {residual:e})")]
    Stall {
        iteration: usize,
        halvings: usize,
        residual: f64,
    },
}

impl Error {
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Range { .. } | Error::Misaligned(_)
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
