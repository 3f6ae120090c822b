//! Adaptive composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 12;
const MAX_DEPTH: u32 = 60;
const MAX_PANELS: usize = 50_000;

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_n'(x)
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=ORDER {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    r.nodes
        .iter()
        .zip(r.weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Fixed-order Gauss–Legendre panels refined by bisection until each panel's
/// halves agree with the parent to within its share of the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Combined absolute and relative tolerance.
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { tol: 1e-11 }
    }
}

impl Quadrature {
    pub fn new(tol: f64) -> Self {
        Self { tol }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let width = b - a;
        let whole = panel(&f, a, b);
        let scale = whole.abs().max(1.0);
        let mut stack = vec![(a, b, whole, 0u32)];
        let mut total = 0.0;
        let mut unresolved = 0.0;
        let mut panels = 0usize;

        while let Some((lo, hi, coarse, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = panel(&f, lo, mid);
            let right = panel(&f, mid, hi);
            let fine = left + right;
            let diff = (fine - coarse).abs();
            panels += 1;
            let share = self.tol * scale * ((hi - lo) / width).abs();
            if diff <= share || !fine.is_finite() {
                total += fine;
            } else if depth >= MAX_DEPTH || panels >= MAX_PANELS {
                total += fine;
                unresolved += diff;
            } else {
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        if !total.is_finite() {
            return Err(Error::Accuracy {
                achieved: f64::INFINITY,
                requested: self.tol,
            });
        }
        if unresolved > self.tol * scale {
            return Err(Error::Accuracy {
                achieved: unresolved / scale,
                requested: self.tol,
            });
        }
        Ok(total)
    }
}
