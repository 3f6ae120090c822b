//! Complete elliptic integrals in parameter form, evaluated with the
//! arithmetic-geometric mean.
//!
//! ```text
//! E1(s) = ∫₀¹ dt / √((1 − t²)(1 − s t²))
//! E2(s) = ∫₀¹ √(1 − s t²) / √(1 − t²) dt
//! ```
//!
//! Negative parameters are allowed; `s ≥ 1` is rejected.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Runs the AGM of (1, √(1 − s)), returning E1 and E2 together.
fn agm_pair(s: f64) -> Result<(f64, f64)> {
    if !s.is_finite() || s >= 1.0 {
        return Err(Error::domain(format!(
            "elliptic parameter must satisfy s < 1, got {s}"
        )));
    }
    let root = (1.0 - s).sqrt();
    // c_1 = (1 − √(1 − s))/2 without cancellation; then c_{n+1} = c_n² / 4a_{n+1}
    let mut c = 0.5 * s / (1.0 + root);
    let mut a = 0.5 * (1.0 + root);
    let mut b = root.sqrt();
    // E/K = 1 − Σ 2^{n−1} c_n², with c_0² = s
    let mut sum = 0.5 * s + c * c;
    let mut pow = 1.0;
    for _ in 0..64 {
        if c.abs() <= 1e-18 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        c = c * c / (4.0 * an);
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = FRAC_PI_2 / a;
    Ok((k, k * (1.0 - sum)))
}

/// Complete integral of the first kind, parameter convention.
pub fn elliptic_e1(s: f64) -> Result<f64> {
    agm_pair(s).map(|(k, _)| k)
}

/// Complete integral of the second kind, parameter convention.
pub fn elliptic_e2(s: f64) -> Result<f64> {
    agm_pair(s).map(|(_, e)| e)
}
