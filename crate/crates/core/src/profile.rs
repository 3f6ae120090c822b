//! Sampled potentials on `[0, 1]`.

use crate::error::{Error, Result};

/// A potential sampled on a grid of `[0, 1]`, read by linear interpolation.
///
/// The grid is nondecreasing; a repeated abscissa marks a jump, with the
/// first copy holding the left limit and the second the right limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Exponent of the norm this profile was optimized for, if any.
    pub p: Option<f64>,
    /// Junction point of a reconstructed profile, if any.
    pub t_star: Option<f64>,
}

impl PotentialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::domain(format!(
                "grid has {} points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::domain("profile needs at least two samples"));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::domain("profile grid must start at 0 and end at 1"));
        }
        if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("profile contains non-finite entries"));
        }
        for w in grid.windows(3) {
            if w[0] == w[1] && w[1] == w[2] {
                return Err(Error::domain(format!(
                    "abscissa {} repeated more than twice",
                    w[0]
                )));
            }
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("profile grid must be nondecreasing"));
        }
        if grid[0] == grid[1] || grid[grid.len() - 2] == 1.0 {
            return Err(Error::domain("profile cannot jump at an endpoint"));
        }
        Ok(Self {
            grid,
            values,
            p: None,
            t_star: None,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![0.0, 1.0], vec![value, value]).expect("valid constant profile")
    }

    /// Piecewise-constant potential on equal bins.
    pub fn piecewise_constant(bins: &[f64]) -> Result<Self> {
        let n = bins.len();
        if n == 0 {
            return Err(Error::domain("need at least one bin"));
        }
        let mut grid = Vec::with_capacity(2 * n);
        let mut values = Vec::with_capacity(2 * n);
        for (k, &v) in bins.iter().enumerate() {
            grid.push(k as f64 / n as f64);
            grid.push(if k + 1 == n {
                1.0
            } else {
                (k + 1) as f64 / n as f64
            });
            values.push(v);
            values.push(v);
        }
        Self::new(grid, values)
    }

    /// Samples `f` on `n + 1` equispaced points.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = n.max(1);
        let grid: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds `c` everywhere.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }

    /// Interior abscissae where the profile jumps.
    pub fn jumps(&self) -> Vec<f64> {
        self.grid
            .windows(2)
            .filter(|w| w[0] == w[1])
            .map(|w| w[0])
            .collect()
    }

    /// Value at `x`; at a jump, `right` selects the right limit.
    pub fn value_at(&self, x: f64, right: bool) -> f64 {
        let g = &self.grid;
        let idx = if right {
            g.partition_point(|&v| v <= x)
        } else {
            g.partition_point(|&v| v < x)
        };
        if idx == 0 {
            return self.values[0];
        }
        if idx >= g.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (g[idx - 1], g[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        if x1 == x0 {
            return if right { v1 } else { v0 };
        }
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// `(∫₀¹ |q − c|^p)^{1/p}` by the trapezoid rule on the profile grid,
    /// which is exact for piecewise-constant profiles.
    pub fn lp_distance_to_constant(&self, c: f64, p: f64) -> f64 {
        let s: f64 = self
            .grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| {
                0.5 * (x[1] - x[0]) * ((v[0] - c).abs().powf(p) + (v[1] - c).abs().powf(p))
            })
            .sum();
        s.powf(1.0 / p)
    }
}
