//! The three-parameter characteristic system for a constant target.
//!
//! With `μ = λ − q0` the shifted eigenvalue, the optimal scaled eigenfunction
//! is a nonlinear oscillation on `[0, T*]` (kernel sign `−ε`, shape `α`) and
//! another on `[T*, 1]` (kernel sign `+ε`, shape `β`). Fitting `i` half-waves
//! left and `m − i` right fixes α and β as functions of μ, and the L² balance
//! across `T*` leaves one scalar equation `G(μ) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sign::Sign;
use crate::specialfun::{conjugate, KernelArgs, Kernels};

/// An inverse nodal problem with a constant target potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    /// Node index, `1 ≤ i < m`.
    pub i: usize,
    /// Eigenfunction index.
    pub m: usize,
    pub p: f64,
    pub t_star: f64,
    pub q0: f64,
}

impl ProblemSpec {
    pub fn new(i: usize, m: usize, p: f64, t_star: f64, q0: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!(
                "eigenfunction index m must be ≥ 2, got {m}"
            )));
        }
        if i < 1 || i >= m {
            return Err(Error::domain(format!(
                "node index must satisfy 1 ≤ i ≤ m − 1 = {}, got {i}",
                m - 1
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(format!(
                "exponent must satisfy 1 < p < ∞, got {p}"
            )));
        }
        if !(t_star > 0.0 && t_star < 1.0) {
            return Err(Error::domain(format!(
                "node location must satisfy 0 < T* < 1, got {t_star}"
            )));
        }
        if !q0.is_finite() {
            return Err(Error::domain(format!(
                "target potential must be finite, got {q0}"
            )));
        }
        Ok(Self {
            i,
            m,
            p,
            t_star,
            q0,
        })
    }

    /// The problem seen through `x ↦ 1 − x`: `(m − i, m, 1 − T*)`.
    pub fn mirrored(&self) -> Self {
        Self {
            i: self.m - self.i,
            t_star: 1.0 - self.t_star,
            ..*self
        }
    }

    fn left_arcs(&self) -> f64 {
        self.i as f64
    }

    fn right_arcs(&self) -> f64 {
        (self.m - self.i) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kernels: Kernels,
    /// `|T* − i/m|` at or below this is treated as ε = 0.
    pub degeneracy_tol: f64,
    /// Relative inset of the root scan from both bracket endpoints.
    pub bracket_margin: f64,
    pub probes: usize,
    /// Probe count used when p ≤ 3/2, where uniqueness is not known.
    pub probes_low_p: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kernels: Kernels::default(),
            degeneracy_tol: 1e-12,
            bracket_margin: 1e-9,
            probes: 64,
            probes_low_p: 512,
        }
    }
}

/// Solved characteristic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalParams {
    pub epsilon: Sign,
    /// Eigenvalue of the optimal potential (unshifted).
    pub lambda: f64,
    /// `λ − q0`.
    pub lambda_shifted: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Amplitude of the scaled eigenfunction on `[0, T*]`.
    pub h: f64,
    /// Amplitude on `[T*, 1]`.
    pub h_tilde: f64,
    /// First-integral constant on `[0, T*]`, equal to `u′(T*⁻)²`.
    pub k: f64,
    /// First-integral constant on `[T*, 1]`, equal to `u′(T*⁺)²`.
    pub k_tilde: f64,
    pub period_left: f64,
    pub period_right: f64,
}

/// One root of the balance equation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub params: CriticalParams,
    pub norm: f64,
    /// `|i V̲ − (m−i) V̄| / max(i V̲, (m−i) V̄)` at the root.
    pub balance_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalSolution {
    pub spec: ProblemSpec,
    /// Parameters of the smallest-norm root.
    pub params: CriticalParams,
    /// `‖q̂ − q0‖_p` for `params`.
    pub norm: f64,
    /// Number of distinct roots found in the bracket.
    pub multiplicity: usize,
    /// Every root found, ordered by eigenvalue.
    pub candidates: Vec<Candidate>,
}

/// Sign of the nonlinear term, from where `T*` sits relative to `i/m`.
pub fn determine_epsilon(i: usize, m: usize, t_star: f64) -> Sign {
    epsilon_with_tol(i, m, t_star, SolverConfig::default().degeneracy_tol)
}

fn epsilon_with_tol(i: usize, m: usize, t_star: f64, tol: f64) -> Sign {
    let d = t_star - i as f64 / m as f64;
    if d.abs() <= tol {
        Sign::Zero
    } else {
        Sign::of(d)
    }
}

/// Open interval of shifted eigenvalues `λ − q0` on which both shape
/// parameters exist.
pub fn lambda_bracket(spec: &ProblemSpec) -> Result<(f64, f64)> {
    Solver::default().lambda_bracket(spec)
}

/// The balance function `G` at the unshifted eigenvalue `lambda`.
pub fn g_value(spec: &ProblemSpec, lambda: f64) -> Result<f64> {
    Solver::default().g_value(spec, lambda)
}

pub fn solve_critical_system(spec: &ProblemSpec) -> Result<NodalSolution> {
    Solver::default().solve(spec)
}

pub fn norm_from_params(spec: &ProblemSpec, params: &CriticalParams) -> Result<f64> {
    Solver::default().norm_from_params(spec, params)
}

struct Branches {
    alpha: f64,
    beta: f64,
    v_left: f64,
    v_right: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Solver {
    pub config: SolverConfig,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }

    pub fn epsilon(&self, spec: &ProblemSpec) -> Sign {
        epsilon_with_tol(spec.i, spec.m, spec.t_star, self.config.degeneracy_tol)
    }

    pub fn lambda_bracket(&self, spec: &ProblemSpec) -> Result<(f64, f64)> {
        let left = (spec.left_arcs() * PI / spec.t_star).powi(2);
        let right = (spec.right_arcs() * PI / (1.0 - spec.t_star)).powi(2);
        match self.epsilon(spec) {
            Sign::Minus => Ok((right, left)),
            Sign::Plus => Ok((left, right)),
            Sign::Zero => Err(Error::domain(format!(
                "T* = {} coincides with i/m = {}/{}: degenerate problem has no bracket",
                spec.t_star, spec.i, spec.m
            ))),
        }
    }

    fn branches(&self, spec: &ProblemSpec, eps: Sign, mu: f64) -> Result<Branches> {
        let kernels = &self.config.kernels;
        let root = mu.sqrt();
        let sides = [
            (eps.flip(), root * spec.t_star / (2.0 * spec.left_arcs()), 1),
            (
                eps,
                root * (1.0 - spec.t_star) / (2.0 * spec.right_arcs()),
                -1,
            ),
        ];
        let mut out = [(0.0, 0.0); 2];
        for (slot, (sigma, target, side)) in out.iter_mut().zip(sides) {
            let gamma = match kernels.invert_quarter_period(spec.p, sigma, target) {
                Ok(g) => g,
                Err(Error::Range { .. }) => {
                    // past a wall the mass on this side is infinite (σ = −1) or
                    // zero (σ = +1), which fixes the sign of G
                    let sign = if sigma == Sign::Minus { side } else { -side };
                    return Err(Error::BracketBoundary { sign });
                }
                Err(e) => return Err(e),
            };
            let v = kernels.mass_integral(&KernelArgs::new(spec.p, sigma, gamma)?)?;
            *slot = (gamma, v);
        }
        Ok(Branches {
            alpha: out[0].0,
            beta: out[1].0,
            v_left: out[0].1,
            v_right: out[1].1,
        })
    }

    /// `G(λ) = i V̲(α(λ)) − (m−i) V̄(β(λ))` at the unshifted eigenvalue.
    pub fn g_value(&self, spec: &ProblemSpec, lambda: f64) -> Result<f64> {
        let eps = self.epsilon(spec);
        if eps == Sign::Zero {
            return Ok(0.0);
        }
        let mu = lambda - spec.q0;
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::domain(format!("λ − q0 must be positive, got {mu}")));
        }
        let b = self.branches(spec, eps, mu)?;
        Ok(spec.left_arcs() * b.v_left - spec.right_arcs() * b.v_right)
    }

    fn g_sign(&self, spec: &ProblemSpec, lambda: f64) -> Result<Sign> {
        match self.g_value(spec, lambda) {
            Ok(g) => Ok(Sign::of(g)),
            Err(Error::BracketBoundary { sign }) => Ok(Sign::of(sign as f64)),
            Err(e) => Err(e),
        }
    }

    fn trivial(&self, spec: &ProblemSpec) -> NodalSolution {
        let mpi = spec.m as f64 * PI;
        let params = CriticalParams {
            epsilon: Sign::Zero,
            lambda: spec.q0 + mpi * mpi,
            lambda_shifted: mpi * mpi,
            alpha: 0.0,
            beta: 0.0,
            h: 0.0,
            h_tilde: 0.0,
            k: 0.0,
            k_tilde: 0.0,
            period_left: 2.0 * spec.t_star / spec.left_arcs(),
            period_right: 2.0 * (1.0 - spec.t_star) / spec.right_arcs(),
        };
        NodalSolution {
            spec: *spec,
            params,
            norm: 0.0,
            multiplicity: 1,
            candidates: vec![Candidate {
                params,
                norm: 0.0,
                balance_residual: 0.0,
            }],
        }
    }

    pub fn solve(&self, spec: &ProblemSpec) -> Result<NodalSolution> {
        let eps = self.epsilon(spec);
        if eps == Sign::Zero {
            return Ok(self.trivial(spec));
        }
        let (lo, hi) = self.lambda_bracket(spec)?;
        let margin = self.config.bracket_margin;
        let (a, b) = (lo * (1.0 + margin), hi * (1.0 - margin));
        let low_p = spec.p <= 1.5;
        let n = if low_p {
            self.config.probes_low_p
        } else {
            self.config.probes
        }
        .max(2);

        let probes: Vec<f64> = (0..n)
            .map(|j| a + (b - a) * j as f64 / (n - 1) as f64)
            .collect();
        let signs = probes
            .iter()
            .map(|&mu| self.g_sign(spec, mu + spec.q0))
            .collect::<Result<Vec<_>>>()?;

        let mut roots = Vec::new();
        let mut j = 0;
        while j + 1 < n {
            let (s0, s1) = (signs[j], signs[j + 1]);
            if s0 == Sign::Zero {
                roots.push(probes[j]);
            } else if s1 != Sign::Zero && s0 != s1 {
                roots.push(self.bisect(spec, probes[j], probes[j + 1], s0)?);
            }
            j += 1;
        }
        if signs[n - 1] == Sign::Zero {
            roots.push(probes[n - 1]);
        }

        if roots.is_empty() {
            return Err(Error::Inconsistency(format!(
                "balance function has no sign change on [{a}, {b}]"
            )));
        }
        if !low_p && roots.len() > 1 {
            return Err(Error::Inconsistency(format!(
                "found {} roots of the balance function for p = {} > 3/2",
                roots.len(),
                spec.p
            )));
        }

        let candidates = roots
            .iter()
            .map(|&mu| self.candidate(spec, eps, mu))
            .collect::<Result<Vec<_>>>()?;
        let best = candidates
            .iter()
            .min_by(|x, y| x.norm.total_cmp(&y.norm))
            .copied()
            .expect("non-empty");
        Ok(NodalSolution {
            spec: *spec,
            params: best.params,
            norm: best.norm,
            multiplicity: candidates.len(),
            candidates,
        })
    }

    fn bisect(&self, spec: &ProblemSpec, mut lo: f64, mut hi: f64, s_lo: Sign) -> Result<f64> {
        let tol = self.config.kernels.root_tol;
        for _ in 0..200 {
            if hi - lo <= tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match self.g_sign(spec, mid + spec.q0)? {
                Sign::Zero => return Ok(mid),
                s if s == s_lo => lo = mid,
                _ => hi = mid,
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn candidate(&self, spec: &ProblemSpec, eps: Sign, mu: f64) -> Result<Candidate> {
        let b = match self.branches(spec, eps, mu) {
            Err(Error::BracketBoundary { .. }) => {
                return Err(Error::Inconsistency(format!(
                    "root μ = {mu} lies at a feasibility wall"
                )))
            }
            r => r?,
        };
        let p = spec.p;
        let ps = conjugate(p);
        let amp = |g: f64| (mu * g).powf(0.5 * (p - 1.0));
        let (h, h_tilde) = (amp(b.alpha), amp(b.beta));
        let e = eps.value();
        let params = CriticalParams {
            epsilon: eps,
            lambda: mu + spec.q0,
            lambda_shifted: mu,
            alpha: b.alpha,
            beta: b.beta,
            h,
            h_tilde,
            k: mu * h * h - e / ps * h.powf(2.0 * ps),
            k_tilde: mu * h_tilde * h_tilde + e / ps * h_tilde.powf(2.0 * ps),
            period_left: 2.0 * spec.t_star / spec.left_arcs(),
            period_right: 2.0 * (1.0 - spec.t_star) / spec.right_arcs(),
        };
        let left = spec.left_arcs() * b.v_left;
        let right = spec.right_arcs() * b.v_right;
        Ok(Candidate {
            params,
            norm: self.norm_from_params(spec, &params)?,
            balance_residual: (left - right).abs() / left.max(right),
        })
    }

    /// `‖q̂ − q0‖_p` from the closed-form norm identity.
    pub fn norm_from_params(&self, spec: &ProblemSpec, params: &CriticalParams) -> Result<f64> {
        if params.epsilon == Sign::Zero {
            return Ok(0.0);
        }
        let kernels = &self.config.kernels;
        let (p, mu) = (spec.p, params.lambda_shifted);
        let eps = params.epsilon;
        let u_left = kernels.norm_integral(&KernelArgs::new(p, eps.flip(), params.alpha)?)?;
        let u_right = kernels.norm_integral(&KernelArgs::new(p, eps, params.beta)?)?;
        // (p − 1) p* = p
        let total = 2.0 * spec.left_arcs() * (mu * params.alpha).powf(p) / mu.sqrt() * u_left
            + 2.0 * spec.right_arcs() * (mu * params.beta).powf(p) / mu.sqrt() * u_right;
        Ok(total.powf(1.0 / p))
    }
}
