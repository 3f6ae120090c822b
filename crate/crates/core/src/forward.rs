//! Direct Dirichlet eigenproblem `−y″ + q y = λ y` on `[0, 1]` by Prüfer
//! shooting.
//!
//! The state is `(θ, ln r, w)` with `y = r sin θ`, `y′ = r cos θ`, `y′(0) = 1`
//! and `w(x) = ∫₀ˣ y²`. Carrying `w` along the shot gives eigenfunction
//! norms and the node-sensitivity constants without a separate quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode::Dopri;
use crate::profile::PotentialProfile;

type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardConfig {
    pub ode_tol: f64,
    /// Relative width at which eigenvalue bisection stops.
    pub eig_tol: f64,
    /// Absolute width at which node bisection stops.
    pub node_tol: f64,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            eig_tol: 1e-13,
            node_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub m: usize,
    pub lambda: f64,
    pub grid: Vec<f64>,
    /// L²-normalized eigenfunction with `E′(0) > 0`.
    pub values: Vec<f64>,
    /// Interior zeros `T_{1,m} < … < T_{m−1,m}`.
    pub nodes: Vec<f64>,
}

/// Fréchet derivative of the node `T_{i,m}` with respect to the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSensitivity {
    pub i: usize,
    pub m: usize,
    pub lambda: f64,
    pub node: f64,
    pub a: f64,
    pub b: f64,
    pub grid: Vec<f64>,
    /// `+a` up to and including the node, `−b` after.
    pub h_values: Vec<f64>,
    /// `H E²` with `E` normalized.
    pub dt_values: Vec<f64>,
}

/// Node sensitivity integrated over equal bins, for bin-wise optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGradient {
    pub lambda: f64,
    pub node: f64,
    pub a: f64,
    pub b: f64,
    /// `∫_bin ∂_q T dx` for each bin.
    pub bins: Vec<f64>,
}

pub fn prufer_angle(q: &PotentialProfile, lambda: f64) -> Result<f64> {
    Forward::default().prufer_angle(q, lambda)
}

pub fn eigenvalue(q: &PotentialProfile, m: usize) -> Result<f64> {
    Forward::default().eigenvalue(q, m)
}

pub fn nodes(q: &PotentialProfile, m: usize) -> Result<Vec<f64>> {
    let f = Forward::default();
    let lambda = f.eigenvalue(q, m)?;
    f.nodes(q, m, lambda)
}

pub fn node_sensitivity(q: &PotentialProfile, i: usize, m: usize) -> Result<NodeSensitivity> {
    Forward::default().node_sensitivity(q, i, m, None)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Forward {
    pub config: ForwardConfig,
}

struct Shot<'a> {
    q: &'a PotentialProfile,
    /// Maximal intervals on which `q` is continuous.
    pieces: Vec<(f64, f64)>,
    lambda: f64,
}

impl<'a> Shot<'a> {
    fn new(q: &'a PotentialProfile, lambda: f64) -> Self {
        let mut cuts = vec![0.0];
        cuts.extend(q.jumps());
        cuts.push(1.0);
        let pieces = cuts.windows(2).map(|w| (w[0], w[1])).collect();
        Self { q, pieces, lambda }
    }

    fn rhs(&self, piece: (f64, f64), x: f64, y: &State) -> State {
        let qx = if x <= piece.0 {
            self.q.value_at(piece.0, true)
        } else if x >= piece.1 {
            self.q.value_at(piece.1, false)
        } else {
            self.q.value_at(x, false)
        };
        let (s, c) = y[0].sin_cos();
        let lq = self.lambda - qx;
        [
            c * c + lq * s * s,
            (1.0 - lq) * s * c,
            (2.0 * y[1]).exp() * s * s,
        ]
    }

    /// States at each (sorted) abscissa in `outputs`; every accepted step is
    /// reported to `on_step`.
    fn run(
        &self,
        dopri: &mut Dopri,
        outputs: &[f64],
        mut on_step: impl FnMut(f64, &State),
    ) -> Result<Vec<State>> {
        let mut y: State = [0.0, 0.0, 0.0];
        let mut x = 0.0;
        let mut out = Vec::with_capacity(outputs.len());
        let mut next = 0;
        for &piece in &self.pieces {
            let f = |xx: f64, yy: &State| self.rhs(piece, xx, yy);
            loop {
                while next < outputs.len() && outputs[next] <= x {
                    out.push(y);
                    next += 1;
                }
                let stop = match outputs.get(next) {
                    Some(&o) if o < piece.1 => o,
                    _ => piece.1,
                };
                y = dopri.integrate(&f, x, y, stop, &mut on_step)?;
                x = stop;
                if stop == piece.1 {
                    break;
                }
            }
        }
        out.resize(outputs.len(), y);
        Ok(out)
    }

    /// Integrates from a known state at `x0` (inside `piece`) to `x1`.
    fn advance(&self, dopri: &mut Dopri, x0: f64, y0: State, x1: f64) -> Result<State> {
        let mut x = x0;
        let mut y = y0;
        for &piece in &self.pieces {
            if piece.1 <= x {
                continue;
            }
            if piece.0 >= x1 {
                break;
            }
            let stop = piece.1.min(x1);
            let f = |xx: f64, yy: &State| self.rhs(piece, xx, yy);
            y = dopri.integrate(&f, x, y, stop, |_, _| {})?;
            x = stop;
        }
        Ok(y)
    }
}

impl Forward {
    pub fn new(config: ForwardConfig) -> Self {
        Self { config }
    }

    fn dopri(&self) -> Dopri {
        Dopri::new(self.config.ode_tol)
    }

    /// Prüfer angle θ(1; λ) with θ(0) = 0.
    pub fn prufer_angle(&self, q: &PotentialProfile, lambda: f64) -> Result<f64> {
        let shot = Shot::new(q, lambda);
        Ok(shot.run(&mut self.dopri(), &[1.0], |_, _| {})?[0][0])
    }

    /// The unique λ with θ(1; λ) = mπ.
    pub fn eigenvalue(&self, q: &PotentialProfile, m: usize) -> Result<f64> {
        if m < 1 {
            return Err(Error::domain("eigenvalue index must be ≥ 1"));
        }
        let target = m as f64 * PI;
        let mf = m as f64;
        let mut lo = q.min() + ((mf - 1.0) * PI).powi(2);
        let mut hi = q.max() + ((mf + 1.0) * PI).powi(2);
        let theta = |l: f64| self.prufer_angle(q, l);
        if !(theta(lo)? < target && theta(hi)? > target) {
            let w = hi - lo;
            lo -= w;
            hi += w;
            if !(theta(lo)? < target && theta(hi)? > target) {
                return Err(Error::Inconsistency(format!(
                    "could not bracket eigenvalue {m} in [{lo}, {hi}]"
                )));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= self.config.eig_tol * mid.abs().max(1.0) {
                break;
            }
            if theta(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Interior zeros of the eigenfunction at the eigenvalue `lambda`.
    pub fn nodes(&self, q: &PotentialProfile, m: usize, lambda: f64) -> Result<Vec<f64>> {
        let shot = Shot::new(q, lambda);
        let mut dopri = self.dopri();
        let mut steps: Vec<(f64, State)> = vec![(0.0, [0.0; 3])];
        shot.run(&mut dopri, &[1.0], |x, y| steps.push((x, *y)))?;

        let mut found = Vec::with_capacity(m.saturating_sub(1));
        for j in 1..m {
            let level = j as f64 * PI;
            let Some(k) = steps
                .windows(2)
                .position(|w| w[0].1[0] < level && w[1].1[0] >= level)
            else {
                break;
            };
            let (x0, y0) = steps[k];
            let (mut lo, mut hi) = (x0, steps[k + 1].0);
            while hi - lo > self.config.node_tol {
                let mid = 0.5 * (lo + hi);
                let y = shot.advance(&mut dopri, x0, y0, mid)?;
                if y[0] < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            found.push(0.5 * (lo + hi));
        }
        if found.len() != m - 1 {
            return Err(Error::Inconsistency(format!(
                "expected {} interior zeros at λ = {lambda}, found {}",
                m - 1,
                found.len()
            )));
        }
        Ok(found)
    }

    /// Eigenvalue, nodes and the normalized eigenfunction sampled on `grid`
    /// (the profile grid when `None`).
    pub fn eigen_solution(
        &self,
        q: &PotentialProfile,
        m: usize,
        grid: Option<&[f64]>,
    ) -> Result<EigenSolution> {
        let lambda = self.eigenvalue(q, m)?;
        let nodes = self.nodes(q, m, lambda)?;
        let grid: Vec<f64> = grid.unwrap_or(q.grid()).to_vec();
        let shot = Shot::new(q, lambda);
        let mut outputs = grid.clone();
        outputs.push(1.0);
        let states = shot.run(&mut self.dopri(), &outputs, |_, _| {})?;
        let norm = states.last().unwrap()[2].sqrt();
        let values = states[..grid.len()]
            .iter()
            .map(|y| y[1].exp() * y[0].sin() / norm)
            .collect();
        Ok(EigenSolution {
            m,
            lambda,
            grid,
            values,
            nodes,
        })
    }

    fn sensitivity_constants(
        &self,
        q: &PotentialProfile,
        i: usize,
        m: usize,
    ) -> Result<(f64, f64, f64, f64, f64)> {
        if i < 1 || i >= m {
            return Err(Error::domain(format!(
                "node index must satisfy 1 ≤ i < m, got ({i}, {m})"
            )));
        }
        let lambda = self.eigenvalue(q, m)?;
        let node = self.nodes(q, m, lambda)?[i - 1];
        let shot = Shot::new(q, lambda);
        let states = shot.run(&mut self.dopri(), &[node, 1.0], |_, _| {})?;
        let (at_node, at_end) = (states[0], states[1]);
        let r2 = (2.0 * at_node[1]).exp();
        let w1 = at_end[2];
        if (r2 / w1).sqrt() < 1e-12 {
            return Err(Error::Inconsistency(format!(
                "eigenfunction slope vanishes at node {node}"
            )));
        }
        let a = (w1 - at_node[2]) / r2;
        let b = at_node[2] / r2;
        Ok((lambda, node, a, b, w1))
    }

    /// `a`, `b`, `H` and `∂_q T = H E²` for the node `T_{i,m}(q)`, sampled on
    /// `grid` (the profile grid when `None`).
    pub fn node_sensitivity(
        &self,
        q: &PotentialProfile,
        i: usize,
        m: usize,
        grid: Option<&[f64]>,
    ) -> Result<NodeSensitivity> {
        let (lambda, node, a, b, w1) = self.sensitivity_constants(q, i, m)?;
        let grid: Vec<f64> = grid.unwrap_or(q.grid()).to_vec();
        let states = Shot::new(q, lambda).run(&mut self.dopri(), &grid, |_, _| {})?;
        let h_values: Vec<f64> = grid
            .iter()
            .map(|&x| if x <= node { a } else { -b })
            .collect();
        let dt_values = states
            .iter()
            .zip(&h_values)
            .map(|(y, h)| {
                let e = y[1].exp() * y[0].sin();
                h * e * e / w1
            })
            .collect();
        Ok(NodeSensitivity {
            i,
            m,
            lambda,
            node,
            a,
            b,
            grid,
            h_values,
            dt_values,
        })
    }

    /// `∫ ∂_q T` over each of `n_bins` equal bins, exact up to the ODE
    /// tolerance.
    pub fn bin_gradient(
        &self,
        q: &PotentialProfile,
        i: usize,
        m: usize,
        n_bins: usize,
    ) -> Result<BinGradient> {
        let (lambda, node, a, b, w1) = self.sensitivity_constants(q, i, m)?;
        let mut outputs: Vec<f64> = (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect();
        outputs.push(node);
        outputs.sort_by(f64::total_cmp);
        let states = Shot::new(q, lambda).run(&mut self.dopri(), &outputs, |_, _| {})?;
        let w_at = |x: f64| {
            let k = outputs.partition_point(|&o| o < x);
            states[k][2]
        };
        let w_node = w_at(node);
        let bins = (0..n_bins)
            .map(|k| {
                let (x0, x1) = (k as f64 / n_bins as f64, (k + 1) as f64 / n_bins as f64);
                let (w0, w1b) = (w_at(x0), w_at(x1));
                let v = if x1 <= node {
                    a * (w1b - w0)
                } else if x0 >= node {
                    -b * (w1b - w0)
                } else {
                    a * (w_node - w0) - b * (w1b - w_node)
                };
                v / w1
            })
            .collect();
        Ok(BinGradient {
            lambda,
            node,
            a,
            b,
            bins,
        })
    }
}
