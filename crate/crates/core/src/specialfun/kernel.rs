//! The three characteristic kernel integrals and the quarter-period inverse.
//!
//! Each integral has the form
//!
//! ```text
//! ∫₀¹ w(t) / √(1 − t² + σ (γ/p*) (1 − t^{2p*})) dt
//! ```
//!
//! with weight `1` (quarter period), `γ^{p−1} t²` (mass) or `t^{2p*}`
//! (norm). Substituting `t = sin θ` cancels the `√(1 − t²)` factor, leaving
//!
//! ```text
//! ∫₀^{π/2} w(sin θ) / √(1 + σ (γ/p*) r(θ)) dθ,   r = (1 − sin^{2p*} θ) / cos² θ,
//! ```
//!
//! where `r` rises smoothly from 1 at θ = 0 to p* at θ = π/2.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::quadrature::Quadrature;
use crate::error::{Error, Result};
use crate::sign::Sign;

/// Closest a `σ = −1` shape parameter may come to the divergence at γ = 1.
pub const WALL_MARGIN: f64 = 1e-9;

/// `φ_p(s) = |s|^{p−2} s`.
pub fn phi(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(p - 2.0) * s
    }
}

/// Conjugate exponent `p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    p: f64,
    sigma: Sign,
    gamma: f64,
}

impl KernelArgs {
    pub fn new(p: f64, sigma: Sign, gamma: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(format!(
                "exponent must satisfy 1 < p < ∞, got {p}"
            )));
        }
        if sigma == Sign::Zero {
            return Err(Error::domain("kernel sign must be ±1"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!(
                "shape parameter must be finite and ≥ 0, got {gamma}"
            )));
        }
        if sigma == Sign::Minus && gamma >= 1.0 - WALL_MARGIN {
            return Err(Error::domain(format!(
                "shape parameter {gamma} too close to the divergence at 1 (σ = −1 requires γ < 1 − {WALL_MARGIN:e})"
            )));
        }
        Ok(Self { p, sigma, gamma })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_star(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn sigma(&self) -> Sign {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `dx/dθ` of the unit quarter wave at `θ`, where `t = sin θ`.
    pub(crate) fn theta_density(&self, theta: f64) -> f64 {
        self.point(theta).1
    }

    /// Returns `(ln sin θ, 1/√(1 + σ(γ/p*) r(θ)))`.
    ///
    /// The radicand is assembled as `1 + σγ − σγ·(1 − r/p*)` so that the
    /// σ = −1 case becomes a sum of two nonnegative terms, `(1 − γ) + γ(1 − r/p*)`,
    /// which stays accurate right up against the wall.
    fn point(&self, theta: f64) -> (f64, f64) {
        let ps = self.p_star();
        let phi = FRAC_PI_2 - theta;
        // x = cos² θ
        let (x, ln_s) = if theta < FRAC_PI_4 {
            let c = theta.cos();
            (c * c, theta.sin().ln())
        } else {
            let c = phi.sin();
            let x = c * c;
            (x, 0.5 * (-x).ln_1p())
        };
        let deficit = if x < 0.25 {
            deficit_series(ps, x)
        } else {
            1.0 + (2.0 * ps * ln_s).exp_m1() / (ps * x)
        };
        let sg = self.sigma.value() * self.gamma;
        let d = (1.0 + sg) - sg * deficit;
        (ln_s, 1.0 / d.sqrt())
    }
}

/// `1 − (1 − (1 − x)^{p*}) / (p* x)` for small `x`, by the binomial series.
fn deficit_series(ps: f64, x: f64) -> f64 {
    // Σ_{k≥2} C(p*, k)(−x)^k / (p* x)
    let mut term = 0.5 * (ps - 1.0) * x;
    let mut sum = term;
    for k in 2..200 {
        term *= -(ps - k as f64) * x / (k as f64 + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Tolerance bundle for kernel evaluation and inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    pub quad: Quadrature,
    /// Bisection stops once the bracket is below `root_tol · max(1, γ)`.
    pub root_tol: f64,
}

impl Default for Kernels {
    fn default() -> Self {
        Self {
            quad: Quadrature::default(),
            root_tol: 1e-12,
        }
    }
}

const MAX_BISECTIONS: usize = 200;

impl Kernels {
    pub fn new(quad_tol: f64, root_tol: f64) -> Self {
        Self {
            quad: Quadrature::new(quad_tol),
            root_tol,
        }
    }

    pub fn quarter_period(&self, args: &KernelArgs) -> Result<f64> {
        if args.gamma == 0.0 {
            return Ok(FRAC_PI_2);
        }
        self.quad.integrate(|th| args.point(th).1, 0.0, FRAC_PI_2)
    }

    pub fn mass_integral(&self, args: &KernelArgs) -> Result<f64> {
        if args.gamma == 0.0 {
            return Ok(0.0);
        }
        let inner = self.quad.integrate(
            |th| {
                let (ln_s, w) = args.point(th);
                (2.0 * ln_s).exp() * w
            },
            0.0,
            FRAC_PI_2,
        )?;
        Ok(args.gamma.powf(args.p - 1.0) * inner)
    }

    pub fn norm_integral(&self, args: &KernelArgs) -> Result<f64> {
        let two_ps = 2.0 * args.p_star();
        self.quad.integrate(
            |th| {
                let (ln_s, w) = args.point(th);
                (two_ps * ln_s).exp() * w
            },
            0.0,
            FRAC_PI_2,
        )
    }

    /// Solves `quarter_period(p, σ, γ) = target` for γ.
    ///
    /// For σ = +1 the quarter period falls from π/2 to 0 on γ ∈ [0, ∞); for
    /// σ = −1 it rises from π/2 towards +∞ on γ ∈ [0, 1), and targets beyond
    /// the value at `1 − WALL_MARGIN` are reported as out of range.
    pub fn invert_quarter_period(&self, p: f64, sigma: Sign, target: f64) -> Result<f64> {
        // validates p and sigma
        KernelArgs::new(p, sigma, 0.0)?;
        if !target.is_finite() {
            return Err(Error::domain(format!(
                "quarter-period target must be finite, got {target}"
            )));
        }
        let at_zero = (target - FRAC_PI_2).abs() <= 4.0 * f64::EPSILON * FRAC_PI_2;
        if at_zero {
            return Ok(0.0);
        }
        let t = |g: f64| self.quarter_period(&KernelArgs { p, sigma, gamma: g });

        let (mut lo, mut hi) = match sigma {
            Sign::Plus => {
                if target > FRAC_PI_2 {
                    return Err(Error::Range {
                        target,
                        lo: 0.0,
                        hi: FRAC_PI_2,
                        bound: "σ = +1 quarter period cannot exceed π/2",
                    });
                }
                if target <= 0.0 {
                    return Err(Error::Range {
                        target,
                        lo: 0.0,
                        hi: FRAC_PI_2,
                        bound: "quarter period must be positive",
                    });
                }
                let mut hi = 1.0;
                while t(hi)? > target {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(Error::Inconsistency(format!(
                            "could not bracket quarter-period target {target}"
                        )));
                    }
                }
                (0.0, hi)
            }
            Sign::Minus => {
                if target < FRAC_PI_2 {
                    return Err(Error::Range {
                        target,
                        lo: FRAC_PI_2,
                        hi: f64::INFINITY,
                        bound: "σ = −1 quarter period cannot fall below π/2",
                    });
                }
                let g_max = 1.0 - WALL_MARGIN;
                let t_max = t(g_max)?;
                if target > t_max {
                    return Err(Error::Range {
                        target,
                        lo: FRAC_PI_2,
                        hi: t_max,
                        bound: "σ = −1 quarter period beyond the γ → 1 wall",
                    });
                }
                (0.0, g_max)
            }
            Sign::Zero => unreachable!(),
        };

        // quarter_period is monotone in γ; keep lo on the π/2 side
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= self.root_tol * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let v = t(mid)?;
            let past = match sigma {
                Sign::Plus => v < target,
                _ => v > target,
            };
            if past {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub fn quarter_period(args: &KernelArgs) -> Result<f64> {
    Kernels::default().quarter_period(args)
}

pub fn mass_integral(args: &KernelArgs) -> Result<f64> {
    Kernels::default().mass_integral(args)
}

pub fn norm_integral(args: &KernelArgs) -> Result<f64> {
    Kernels::default().norm_integral(args)
}

pub fn invert_quarter_period(p: f64, sigma: Sign, target: f64) -> Result<f64> {
    Kernels::default().invert_quarter_period(p, sigma, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn args(p: f64, sigma: Sign, gamma: f64) -> KernelArgs {
        KernelArgs::new(p, sigma, gamma).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(2.0, -3.5), -3.5);
        assert_eq!(phi(3.0, 2.0), 4.0);
        assert!((phi(1.5, 4.0) - 2.0).abs() < 1e-15);
        assert_eq!(phi(1.3, 0.0), 0.0);
    }

    #[test]
    fn domain_checks() {
        assert!(KernelArgs::new(1.0, Sign::Plus, 0.5).is_err());
        assert!(KernelArgs::new(2.0, Sign::Zero, 0.5).is_err());
        assert!(KernelArgs::new(2.0, Sign::Plus, -0.1).is_err());
        assert!(KernelArgs::new(2.0, Sign::Minus, 1.0).is_err());
        assert!(KernelArgs::new(2.0, Sign::Minus, 1.0 - 1e-10).is_err());
        assert!(KernelArgs::new(2.0, Sign::Minus, 1.0 - 1e-8).is_ok());
        assert!(KernelArgs::new(2.0, Sign::Plus, 1e6).is_ok());
    }

    #[test]
    fn gamma_zero_limits() {
        for p in [1.6, 2.0, 3.0] {
            for s in [Sign::Minus, Sign::Plus] {
                let a = args(p, s, 0.0);
                assert!((quarter_period(&a).unwrap() - PI / 2.0).abs() < 1e-10);
                assert_eq!(mass_integral(&a).unwrap(), 0.0);
            }
        }
        // Wallis: ∫ t⁴/√(1−t²) = 3π/16
        let u = norm_integral(&args(2.0, Sign::Plus, 0.0)).unwrap();
        assert!((u - 3.0 * PI / 16.0).abs() < 1e-12);
    }

    // reference values from 40-digit quadrature and elliptic evaluation
    #[test]
    fn frozen_reference_values() {
        let t = quarter_period(&args(2.0, Sign::Plus, 2.0)).unwrap();
        assert!((t - 1.001_077_380_456_106_2).abs() < 1e-11);
        let v = mass_integral(&args(2.0, Sign::Plus, 2.0)).unwrap();
        assert!((v - 0.950_447_870_702_034_2).abs() < 1e-11);
        let v = mass_integral(&args(2.0, Sign::Minus, 0.5)).unwrap();
        assert!((v - 0.525_853_445_105_089_1).abs() < 1e-11);
        let u = norm_integral(&args(2.0, Sign::Plus, 2.0)).unwrap();
        assert!((u - 0.350_568_963_403_392_8).abs() < 1e-11);
        let u = norm_integral(&args(3.0, Sign::Plus, 1.0)).unwrap();
        assert!((u - 0.478_184_115_981_099_3).abs() < 1e-11);
    }

    #[test]
    fn diverges_towards_the_wall() {
        let expect = [
            3.102_179_306_396_332,
            4.726_800_814_917_892,
            6.354_908_786_323_125,
        ];
        let mut prev = 0.0;
        for (g, e) in [0.9, 0.99, 0.999].into_iter().zip(expect) {
            let t = quarter_period(&args(2.0, Sign::Minus, g)).unwrap();
            assert!((t - e).abs() < 1e-10, "{g}: {t} vs {e}");
            assert!(t > prev);
            prev = t;
        }
        let t = quarter_period(&args(2.0, Sign::Minus, 1.0 - 2e-9)).unwrap();
        assert!(t > 15.0);
    }

    #[test]
    fn inversion_examples() {
        for p in [1.4, 2.0, 3.0] {
            assert_eq!(invert_quarter_period(p, Sign::Plus, PI / 2.0).unwrap(), 0.0);
        }
        let g = invert_quarter_period(2.0, Sign::Minus, 2.0).unwrap();
        assert!((g - 0.498_340_757_716_498_5).abs() < 1e-10);
        let g = invert_quarter_period(2.0, Sign::Plus, 1.0).unwrap();
        assert!((g - 2.007_338_828_162_457).abs() < 1e-10);
    }

    #[test]
    fn inversion_range_errors() {
        assert!(matches!(
            invert_quarter_period(2.0, Sign::Plus, 1.7),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            invert_quarter_period(2.0, Sign::Plus, -1.0),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            invert_quarter_period(2.0, Sign::Minus, 1.5),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            invert_quarter_period(2.0, Sign::Minus, 40.0),
            Err(Error::Range { .. })
        ));
    }
}
