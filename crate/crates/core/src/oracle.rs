//! Direct minimization of `‖q − q0‖_p` over piecewise-constant potentials
//! subject to the node constraint, as an independent check on the analytic
//! construction.
//!
//! Each iteration moves along the objective gradient projected onto the
//! tangent of the constraint, then restores `T_{i,m}(q) = T*` by Newton steps
//! along the node gradient. Steps are halved until the restored point lowers
//! the norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critical::{determine_epsilon, ProblemSpec};
use crate::error::{Error, Result};
use crate::forward::{Forward, ForwardConfig};
use crate::profile::PotentialProfile;
use crate::sign::Sign;
use crate::specialfun::phi;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_bins: usize,
    pub max_iters: usize,
    /// Accepted `|T_{i,m}(q) − T*|`.
    pub constraint_tol: f64,
    /// Largest step, relative to the size of the current perturbation.
    pub step0: f64,
    /// Seed for the jitter on the initial perturbation.
    pub seed: u64,
    pub forward: ForwardConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_bins: 200,
            max_iters: 500,
            constraint_tol: 1e-10,
            step0: 1.0,
            seed: 0,
            forward: ForwardConfig::default(),
        }
    }
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStep {
    pub norm: f64,
    /// `|T_{i,m}(q) − T*|` after restoration.
    pub residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub profile: PotentialProfile,
    /// Bin values of `q`.
    pub bins: Vec<f64>,
    pub norm: f64,
    pub lambda: f64,
    pub node: f64,
    /// Accepted iterates, starting with the restored initial guess.
    pub history: Vec<OracleStep>,
    pub iterations: usize,
    /// Cosine between `φ_p(q − q0)` and the node gradient at the final
    /// iterate; `None` when the answer is `q0` itself.
    pub alignment: Option<f64>,
}

const MAX_HALVINGS: usize = 30;
const MAX_NEWTON: usize = 60;
const MIN_DECREASE: f64 = 1e-9;
/// Projected-gradient size, relative to the full gradient, treated as stationary.
const STATIONARY: f64 = 1e-10;

pub fn minimize_norm(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<OracleResult> {
    Oracle::new(*spec, *cfg)?.run()
}

struct Eval {
    v: Vec<f64>,
    node: f64,
    lambda: f64,
    grad: Vec<f64>,
    norm: f64,
}

struct Oracle {
    spec: ProblemSpec,
    cfg: OracleConfig,
    forward: Forward,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl Oracle {
    fn new(spec: ProblemSpec, cfg: OracleConfig) -> Result<Self> {
        if cfg.n_bins < 32 {
            return Err(Error::domain(format!(
                "oracle needs at least 32 bins, got {}",
                cfg.n_bins
            )));
        }
        if !(cfg.constraint_tol > 0.0 && cfg.constraint_tol <= 1e-6) {
            return Err(Error::domain(format!(
                "constraint tolerance must lie in (0, 1e-6], got {}",
                cfg.constraint_tol
            )));
        }
        if !(cfg.step0 > 0.0 && cfg.step0.is_finite()) {
            return Err(Error::domain(format!(
                "initial step must be positive, got {}",
                cfg.step0
            )));
        }
        Ok(Self {
            spec,
            cfg,
            forward: Forward::new(cfg.forward),
        })
    }

    fn norm(&self, v: &[f64]) -> f64 {
        let w = 1.0 / v.len() as f64;
        (w * v.iter().map(|x| x.abs().powf(self.spec.p)).sum::<f64>()).powf(1.0 / self.spec.p)
    }

    fn profile(&self, v: &[f64]) -> Result<PotentialProfile> {
        let bins: Vec<f64> = v.iter().map(|x| self.spec.q0 + x).collect();
        let mut q = PotentialProfile::piecewise_constant(&bins)?;
        q.p = Some(self.spec.p);
        Ok(q)
    }

    fn eval(&self, v: Vec<f64>) -> Result<Eval> {
        let g = self
            .forward
            .bin_gradient(&self.profile(&v)?, self.spec.i, self.spec.m, v.len())?;
        Ok(Eval {
            norm: self.norm(&v),
            node: g.node,
            lambda: g.lambda,
            grad: g.bins,
            v,
        })
    }

    /// Newton iteration along the node gradient back onto `T = T*`.
    fn restore(&self, v: Vec<f64>) -> Result<Eval> {
        let mut e = self.eval(v)?;
        let mut last = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            let r = self.spec.t_star - e.node;
            if r.abs() <= self.cfg.constraint_tol {
                return Ok(e);
            }
            if r.abs() >= last {
                break;
            }
            last = r.abs();
            let c = r / dot(&e.grad, &e.grad);
            let v = e.v.iter().zip(&e.grad).map(|(x, g)| x + c * g).collect();
            e = self.eval(v)?;
        }
        Err(Error::Accuracy {
            achieved: (self.spec.t_star - e.node).abs(),
            requested: self.cfg.constraint_tol,
        })
    }

    fn alignment(&self, e: &Eval) -> f64 {
        let f: Vec<f64> = e.v.iter().map(|&x| phi(self.spec.p, x)).collect();
        dot(&f, &e.grad) / (dot(&f, &f) * dot(&e.grad, &e.grad)).sqrt()
    }

    fn initial(&self, eps: Sign) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let n = self.cfg.n_bins;
        (0..n)
            .map(|k| {
                let centre = (k as f64 + 0.5) / n as f64;
                let side = if centre < self.spec.t_star { 1.0 } else { -1.0 };
                0.5 * eps.value() * side * (1.0 + 0.1 * rng.gen_range(-1.0..1.0))
            })
            .collect()
    }

    fn run(&self) -> Result<OracleResult> {
        let eps = determine_epsilon(self.spec.i, self.spec.m, self.spec.t_star);
        if eps == Sign::Zero {
            let v = vec![0.0; self.cfg.n_bins];
            let e = self.eval(v)?;
            return self.finish(e, Vec::new(), 0, None);
        }

        let mut cur = self.restore(self.initial(eps))?;
        let mut history = vec![OracleStep {
            norm: cur.norm,
            residual: (cur.node - self.spec.t_star).abs(),
            step: 0.0,
        }];
        let mut step = self.cfg.step0;
        let mut iterations = 0;
        while iterations < self.cfg.max_iters {
            // descent direction: −φ_p(v) with its component along the node
            // gradient removed, scaled to the size of v
            let f: Vec<f64> = cur.v.iter().map(|&x| phi(self.spec.p, x)).collect();
            let c = dot(&f, &cur.grad) / dot(&cur.grad, &cur.grad);
            let d: Vec<f64> = f.iter().zip(&cur.grad).map(|(f, g)| c * g - f).collect();
            if max_abs(&d) <= STATIONARY * max_abs(&f) {
                break;
            }
            let scale = max_abs(&cur.v) / max_abs(&f);

            let mut halvings = 0;
            let next = loop {
                let trial: Vec<f64> = cur
                    .v
                    .iter()
                    .zip(&d)
                    .map(|(x, d)| x + step * scale * d)
                    .collect();
                match self.restore(trial) {
                    Ok(e) if e.norm <= cur.norm => break e,
                    Ok(_) | Err(Error::Accuracy { .. }) | Err(Error::StepUnderflow { .. }) => {}
                    Err(e) => return Err(e),
                }
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::Stall {
                        iteration: iterations,
                        halvings: MAX_HALVINGS,
                        residual: (cur.node - self.spec.t_star).abs(),
                    });
                }
                step *= 0.5;
            };
            iterations += 1;
            let decrease = (cur.norm - next.norm) / cur.norm;
            history.push(OracleStep {
                norm: next.norm,
                residual: (next.node - self.spec.t_star).abs(),
                step,
            });
            cur = next;
            if decrease < MIN_DECREASE {
                break;
            }
            if halvings == 0 {
                step = (2.0 * step).min(self.cfg.step0);
            }
        }
        let alignment = self.alignment(&cur);
        self.finish(cur, history, iterations, Some(alignment))
    }

    fn finish(
        &self,
        e: Eval,
        history: Vec<OracleStep>,
        iterations: usize,
        alignment: Option<f64>,
    ) -> Result<OracleResult> {
        let bins: Vec<f64> = e.v.iter().map(|x| self.spec.q0 + x).collect();
        let mut profile = self.profile(&e.v)?;
        profile.t_star = Some(self.spec.t_star);
        Ok(OracleResult {
            profile,
            bins,
            norm: e.norm,
            lambda: e.lambda,
            node: e.node,
            history,
            iterations,
            alignment,
        })
    }
}
