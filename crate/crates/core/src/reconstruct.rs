//! Sampling the optimal scaled eigenfunction and the optimal potential.
//!
//! Each side of `T*` is a chain of half-waves of one nonlinear oscillation.
//! A single quarter wave is computed from its first integral in the angle
//! variable `t = sin θ` on a uniform θ grid, then tiled by reflection. The
//! θ grid also carries trapezoid weights, which integrate smooth functions
//! of `u` to near machine precision.

use std::f64::consts::FRAC_PI_2;

use crate::critical::{CriticalParams, ProblemSpec};
use crate::error::{Error, Result};
use crate::profile::PotentialProfile;
use crate::sign::Sign;
use crate::specialfun::{conjugate, KernelArgs, Kernels};

/// One rising quarter wave, from a zero to the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterWave {
    pub x: Vec<f64>,
    /// `t_j = sin θ_j` with θ uniform on `[0, π/2]`.
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    /// `dx/dθ` at each sample.
    pub dx_dtheta: Vec<f64>,
    pub theta_step: f64,
    pub amplitude: f64,
}

impl QuarterWave {
    /// Length of the quarter wave, `x_n`.
    pub fn length(&self) -> f64 {
        *self.x.last().expect("non-empty")
    }
}

/// The sampled scaled eigenfunction on `[0, 1]`.
///
/// `T*` appears twice in the grid: index `junction` holds the left limit and
/// `junction + 1` the right limit.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub spec: ProblemSpec,
    pub grid: Vec<f64>,
    pub u_values: Vec<f64>,
    /// Quadrature weights: `∫ f(u) dx ≈ Σ weights[j] f(u[j])` on each side.
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub lambda_shifted: f64,
    pub epsilon: Sign,
    pub amplitude_left: f64,
    pub amplitude_right: f64,
    pub junction: usize,
    /// Indices of all zeros in order, both copies of `T*` included.
    pub zero_indices: Vec<usize>,
    /// Indices of the amplitude points.
    pub turning_indices: Vec<usize>,
}

impl WaveProfile {
    pub fn t_star(&self) -> f64 {
        self.spec.t_star
    }

    pub fn p(&self) -> f64 {
        self.spec.p
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn left(&self) -> std::ops::Range<usize> {
        0..self.junction + 1
    }

    pub fn right(&self) -> std::ops::Range<usize> {
        self.junction + 1..self.grid.len()
    }

    /// `∫ f(u) dx` over the index range.
    pub fn integrate(&self, range: std::ops::Range<usize>, f: impl Fn(f64) -> f64) -> f64 {
        range.map(|j| self.weights[j] * f(self.u_values[j])).sum()
    }

    /// `(∫₀^{T*} u², ∫_{T*}¹ u²)`.
    pub fn l2_balance(&self) -> (f64, f64) {
        (
            self.integrate(self.left(), |u| u * u),
            self.integrate(self.right(), |u| u * u),
        )
    }

    /// `‖u‖_r` over `[0, 1]`.
    pub fn lp_norm(&self, r: f64) -> f64 {
        self.integrate(0..self.len(), |u| u.abs().powf(r))
            .powf(1.0 / r)
    }

    /// Interior zeros of `u`, excluding 0 and 1 but including `T*` once.
    pub fn interior_zeros(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .zero_indices
            .iter()
            .filter(|&&j| j != 0 && j + 1 != self.len() && j != self.junction + 1)
            .map(|&j| self.grid[j])
            .collect();
        z.dedup();
        z
    }

    /// Strict sign changes of `u` inside the index range, zeros skipped.
    pub fn sign_changes(&self, range: std::ops::Range<usize>) -> usize {
        let mut last = 0.0_f64;
        let mut count = 0;
        for &u in &self.u_values[range] {
            if u != 0.0 {
                if last != 0.0 && (u > 0.0) != (last > 0.0) {
                    count += 1;
                }
                last = u;
            }
        }
        count
    }
}

/// Relative gap between the θ-trapezoid and the adaptive quarter length
/// above which a quarter wave is resampled on a grid twice as fine.
const REFINE_TOL: f64 = 1e-11;
const MAX_QUARTER_SAMPLES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, Default)]
pub struct Reconstructor {
    pub kernels: Kernels,
}

/// Quarter wave with amplitude `(μγ)^{(p−1)/2}`, or 1 in the linear limit γ = 0.
pub fn quarter_wave(
    p: f64,
    lambda_shifted: f64,
    sigma: Sign,
    gamma: f64,
    n: usize,
) -> Result<QuarterWave> {
    let amplitude = if gamma == 0.0 {
        1.0
    } else {
        (lambda_shifted * gamma).powf(0.5 * (p - 1.0))
    };
    Reconstructor::default().quarter_wave(p, lambda_shifted, sigma, gamma, amplitude, n)
}

pub fn assemble_wave(
    spec: &ProblemSpec,
    params: &CriticalParams,
    n_per_arc: usize,
) -> Result<WaveProfile> {
    Reconstructor::default().assemble_wave(spec, params, n_per_arc)
}

/// `q̂ = q0 + ε|u|^{2p*−2}` on `[0, T*]` and `q0 − ε|u|^{2p*−2}` on `(T*, 1]`.
pub fn potential_from_wave(wave: &WaveProfile) -> PotentialProfile {
    let e = wave.epsilon.value();
    let power = 2.0 * conjugate(wave.p()) - 2.0;
    let values = (0..wave.len())
        .map(|j| {
            let side = if j <= wave.junction { e } else { -e };
            wave.spec.q0 + side * wave.u_values[j].abs().powf(power)
        })
        .collect();
    let mut q = PotentialProfile::new(wave.grid.clone(), values)
        .expect("wave grid is a valid profile grid");
    q.p = Some(wave.p());
    q.t_star = Some(wave.t_star());
    q
}

impl Reconstructor {
    pub fn new(kernels: Kernels) -> Self {
        Self { kernels }
    }

    pub fn quarter_wave(
        &self,
        p: f64,
        lambda_shifted: f64,
        sigma: Sign,
        gamma: f64,
        amplitude: f64,
        n: usize,
    ) -> Result<QuarterWave> {
        let args = KernelArgs::new(p, sigma, gamma)?;
        if !(lambda_shifted > 0.0 && lambda_shifted.is_finite()) {
            return Err(Error::domain(format!(
                "λ − q0 must be positive, got {lambda_shifted}"
            )));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::domain(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if n < 16 {
            return Err(Error::domain(format!(
                "quarter wave needs n ≥ 16 intervals, got {n}"
            )));
        }
        let scale = 1.0 / lambda_shifted.sqrt();
        let mut n = n;
        loop {
            let q = self.sample_quarter(&args, scale, amplitude, n)?;
            // near the σ = −1 wall the integrand peaks sharply at the turning
            // point; refine until the trapezoid weights resolve it
            let trapezoid: f64 = q
                .dx_dtheta
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    w * d * q.theta_step
                })
                .sum();
            if (trapezoid - q.length()).abs() <= REFINE_TOL * q.length() || n >= MAX_QUARTER_SAMPLES
            {
                return Ok(q);
            }
            n *= 2;
        }
    }

    fn sample_quarter(
        &self,
        args: &KernelArgs,
        scale: f64,
        amplitude: f64,
        n: usize,
    ) -> Result<QuarterWave> {
        let step = FRAC_PI_2 / n as f64;
        let theta = |j: usize| if j == n { FRAC_PI_2 } else { j as f64 * step };

        let mut x = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        x.push(0.0);
        for j in 0..n {
            acc += if args.gamma() == 0.0 {
                theta(j + 1) - theta(j)
            } else {
                self.kernels
                    .quad
                    .integrate(|th| args.theta_density(th), theta(j), theta(j + 1))?
            };
            x.push(scale * acc);
        }
        let t: Vec<f64> = (0..=n).map(|j| theta(j).sin()).collect();
        Ok(QuarterWave {
            u: t.iter().map(|t| amplitude * t).collect(),
            dx_dtheta: (0..=n)
                .map(|j| scale * args.theta_density(theta(j)))
                .collect(),
            x,
            t,
            theta_step: step,
            amplitude,
        })
    }

    /// Tiles quarter waves into `i` half-waves on `[0, T*]` and `m − i` on
    /// `[T*, 1]`, alternating in sign and positive on the first.
    pub fn assemble_wave(
        &self,
        spec: &ProblemSpec,
        params: &CriticalParams,
        n_per_arc: usize,
    ) -> Result<WaveProfile> {
        if n_per_arc < 32 {
            return Err(Error::domain(format!(
                "need at least 32 samples per half-wave, got {n_per_arc}"
            )));
        }
        let n = n_per_arc.div_ceil(2);
        let eps = params.epsilon;
        let mu = params.lambda_shifted;
        let (left, right) = if eps == Sign::Zero {
            let q = self.quarter_wave(spec.p, mu, Sign::Plus, 0.0, 1.0, n)?;
            (q.clone(), q)
        } else {
            (
                self.quarter_wave(spec.p, mu, eps.flip(), params.alpha, params.h, n)?,
                self.quarter_wave(spec.p, mu, eps, params.beta, params.h_tilde, n)?,
            )
        };

        let mut b = Builder::default();
        b.side(&left, 0.0, spec.t_star, spec.i, 1.0);
        let junction = b.grid.len() - 1;
        let first_right = if spec.i.is_multiple_of(2) { 1.0 } else { -1.0 };
        b.side(&right, spec.t_star, 1.0, spec.m - spec.i, first_right);

        Ok(WaveProfile {
            spec: *spec,
            grid: b.grid,
            u_values: b.u,
            weights: b.weights,
            lambda: params.lambda,
            lambda_shifted: mu,
            epsilon: eps,
            amplitude_left: left.amplitude,
            amplitude_right: right.amplitude,
            junction,
            zero_indices: b.zeros,
            turning_indices: b.turning,
        })
    }
}

#[derive(Default)]
struct Builder {
    grid: Vec<f64>,
    u: Vec<f64>,
    weights: Vec<f64>,
    zeros: Vec<usize>,
    turning: Vec<usize>,
}

impl Builder {
    fn push(&mut self, x: f64, u: f64, w: f64) {
        self.grid.push(x);
        self.u.push(u);
        self.weights.push(w);
    }

    fn side(&mut self, q: &QuarterWave, start: f64, end: f64, arcs: usize, first_sign: f64) {
        let n = q.x.len() - 1;
        let len = (end - start) / arcs as f64;
        // snap the quarter to exactly half an arc
        let c = 0.5 * len / q.length();
        let w = |k: usize| {
            let trap = if k == 0 || k == n { 0.5 } else { 1.0 };
            trap * q.theta_step * c * q.dx_dtheta[k]
        };
        let mut sign = first_sign;
        for a in 0..arcs {
            let x0 = start + a as f64 * len;
            let x1 = if a + 1 == arcs {
                end
            } else {
                start + (a + 1) as f64 * len
            };
            if a == 0 {
                self.zeros.push(self.grid.len());
                self.push(x0, 0.0, w(0));
            } else {
                *self.weights.last_mut().expect("previous arc") += w(0);
            }
            for k in 1..=n {
                let x = if k == n {
                    x0 + 0.5 * len
                } else {
                    x0 + c * q.x[k]
                };
                let wk = if k == n { 2.0 * w(k) } else { w(k) };
                if k == n {
                    self.turning.push(self.grid.len());
                }
                self.push(x, sign * q.u[k], wk);
            }
            for k in (1..n).rev() {
                self.push(x1 - c * q.x[k], sign * q.u[k], w(k));
            }
            self.zeros.push(self.grid.len());
            self.push(x1, 0.0, w(0));
            sign = -sign;
        }
    }
}

/// Derivative at `x0` of the Lagrange interpolant through `(xs, ys)`.
fn lagrange_slope(xs: &[f64], ys: &[f64], x0: f64) -> f64 {
    let n = xs.len();
    let mut total = 0.0;
    for j in 0..n {
        // d/dx of the j-th basis polynomial
        let mut dl = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let mut term = 1.0 / (xs[j] - xs[k]);
            for l in 0..n {
                if l != j && l != k {
                    term *= (x0 - xs[l]) / (xs[j] - xs[l]);
                }
            }
            dl += term;
        }
        total += ys[j] * dl;
    }
    total
}

/// Slopes on one side from five-point stencils, centred where possible and
/// zero at turning points.
fn side_slopes(xs: &[f64], us: &[f64], turning: &[bool]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|j| {
            if turning[j] {
                0.0
            } else {
                let lo = j.saturating_sub(2).min(n - 5);
                lagrange_slope(&xs[lo..lo + 5], &us[lo..lo + 5], xs[j])
            }
        })
        .collect()
}

/// Maximum relative deviation of the first integrals from `k` (left) and
/// `k̃` (right), with slopes from fourth-order finite differences.
pub fn first_integral_residual(wave: &WaveProfile, params: &CriticalParams) -> (f64, f64) {
    let mu = params.lambda_shifted;
    let e = params.epsilon.value();
    let ps = conjugate(wave.p());
    let mut turning = vec![false; wave.len()];
    for &j in &wave.turning_indices {
        turning[j] = true;
    }
    let side = |range: std::ops::Range<usize>, nonlinear: f64, k: f64| {
        let xs = &wave.grid[range.clone()];
        let us = &wave.u_values[range.clone()];
        let du = side_slopes(xs, us, &turning[range]);
        us.iter()
            .zip(&du)
            .map(|(&u, &d)| {
                let energy = d * d + nonlinear / ps * u.abs().powf(2.0 * ps) + mu * u * u;
                (energy - k).abs() / k
            })
            .fold(0.0, f64::max)
    };
    let (k, k_tilde) = if params.epsilon == Sign::Zero {
        (
            mu * wave.amplitude_left.powi(2),
            mu * wave.amplitude_right.powi(2),
        )
    } else {
        (params.k, params.k_tilde)
    };
    (side(wave.left(), -e, k), side(wave.right(), e, k_tilde))
}

/// `(u′(T*⁻), u′(T*⁺))` from one-sided four-point differences.
pub fn junction_slopes(wave: &WaveProfile) -> (f64, f64) {
    let j = wave.junction;
    let (g, u) = (&wave.grid, &wave.u_values);
    (
        lagrange_slope(&g[j - 3..=j], &u[j - 3..=j], g[j]),
        lagrange_slope(&g[j + 1..j + 5], &u[j + 1..j + 5], g[j + 1]),
    )
}

/// Discrete residual of the critical equation
/// `−u″ + q u = λ u` with `q = q0 ± ε|u|^{2p*−2}` on each side of `T*`.
///
/// Returns the larger of the normalized eigen-equation residual (using
/// `q_candidate`) and the normalized mismatch between `q_candidate` and the
/// critical relation (using `q0_profile`), both over interior samples.
pub fn critical_residual(
    q_candidate: &PotentialProfile,
    u_candidate: &WaveProfile,
    q0_profile: &PotentialProfile,
    lambda: f64,
    epsilon: Sign,
) -> Result<f64> {
    let grid = &u_candidate.grid;
    if q_candidate.grid() != grid.as_slice() || q0_profile.grid() != grid.as_slice() {
        return Err(Error::Misaligned(format!(
            "candidate potential, target and wave must share one grid ({}, {} and {} samples)",
            q_candidate.len(),
            q0_profile.len(),
            grid.len()
        )));
    }
    let power = 2.0 * conjugate(u_candidate.p()) - 2.0;
    let (q, q0, u) = (
        q_candidate.values(),
        q0_profile.values(),
        &u_candidate.u_values,
    );
    let e = epsilon.value();

    let (mut eq_res, mut eq_scale) = (0.0_f64, 0.0_f64);
    let (mut rel_res, mut rel_scale) = (0.0_f64, 0.0_f64);
    for (range, side) in [(u_candidate.left(), e), (u_candidate.right(), -e)] {
        for j in range.start + 1..range.end - 1 {
            let (hl, hr) = (grid[j] - grid[j - 1], grid[j + 1] - grid[j]);
            let d2 = 2.0 * ((u[j + 1] - u[j]) / hr - (u[j] - u[j - 1]) / hl) / (hl + hr);
            eq_res = eq_res.max((-d2 + (q[j] - lambda) * u[j]).abs());
            eq_scale = eq_scale.max(((q[j] - lambda) * u[j]).abs());
            let critical = q0[j] + side * u[j].abs().powf(power);
            rel_res = rel_res.max((q[j] - critical).abs());
            rel_scale = rel_scale.max((q[j] - q0[j]).abs());
        }
    }
    let norm = |r: f64, s: f64| {
        if r == 0.0 {
            0.0
        } else {
            r / s.max(f64::MIN_POSITIVE)
        }
    };
    Ok(norm(eq_res, eq_scale).max(norm(rel_res, rel_scale)))
}
