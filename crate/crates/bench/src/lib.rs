//! Benchmark fixtures shared by the criterion targets.

use nodal_core::ProblemSpec;

/// The reference asymmetric instance: first node of the second eigenfunction at 0.4.
pub fn reference_spec(p: f64) -> ProblemSpec {
    ProblemSpec::new(1, 2, p, 0.4, 0.0).expect("valid spec")
}
