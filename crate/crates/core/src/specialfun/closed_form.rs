//! Elliptic closed forms of the kernel integrals for p = 2.
//!
//! With p = 2 the radicand factors as
//! `(1 − t²)(1 + σγ/2 + (σγ/2) t²)`, so every kernel reduces to E1/E2 at
//! parameter `s = −σγ/(2 + σγ)`.

use std::f64::consts::FRAC_PI_2;

use super::elliptic::{elliptic_e1, elliptic_e2};
use super::kernel::KernelArgs;
use crate::error::{Error, Result};

fn parts(args: &KernelArgs) -> Result<(f64, f64, f64, f64)> {
    if args.p() != 2.0 {
        return Err(Error::domain(format!(
            "elliptic closed forms need p = 2, got {}",
            args.p()
        )));
    }
    let sg = args.sigma().value() * args.gamma();
    let s = -sg / (2.0 + sg);
    Ok((sg, 2.0 + sg, elliptic_e1(s)?, elliptic_e2(s)?))
}

pub fn quarter_period_p2(args: &KernelArgs) -> Result<f64> {
    let (_, base, e1, _) = parts(args)?;
    Ok((2.0 / base).sqrt() * e1)
}

pub fn mass_integral_p2(args: &KernelArgs) -> Result<f64> {
    let (_, base, e1, e2) = parts(args)?;
    Ok(args.sigma().value() * (2.0 * base).sqrt() * (e2 - e1))
}

/// Loses roughly `ε/γ²` relative accuracy to cancellation as γ → 0.
pub fn norm_integral_p2(args: &KernelArgs) -> Result<f64> {
    let (sg, base, e1, e2) = parts(args)?;
    let g = args.gamma();
    if g == 0.0 {
        return Ok(3.0 * FRAC_PI_2 / 8.0);
    }
    Ok((2.0 * base).sqrt() / (3.0 * g * g) * ((4.0 + sg) * e1 - 4.0 * e2))
}
