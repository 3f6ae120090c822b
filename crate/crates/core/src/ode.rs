//! Dormand–Prince 5(4) with standard step-size control.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights are the last row of A; E = b5 − b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Dopri {
    pub tol: f64,
    /// Step size carried between calls.
    pub h: f64,
}

impl Dopri {
    pub fn new(tol: f64) -> Self {
        Self { tol, h: 1e-3 }
    }

    /// Advances `y` from `x0` to `x1`, calling `on_step(x, y)` after every
    /// accepted step.
    pub fn integrate<const N: usize, F, O>(
        &mut self,
        f: &F,
        x0: f64,
        mut y: [f64; N],
        x1: f64,
        mut on_step: O,
    ) -> Result<[f64; N]>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        let span = x1 - x0;
        if span <= 0.0 {
            return Ok(y);
        }
        let h_min = 1e-14 * x1.abs().max(1.0);
        let mut x = x0;
        let mut h = self.h.min(span);
        let mut k = [[0.0; N]; 7];
        k[0] = f(x, &y);
        while x < x1 {
            let last = x + h >= x1 || x1 - (x + h) < h_min;
            if last {
                h = x1 - x;
            }
            let mut stage = [0.0; N];
            for s in 1..7 {
                for n in 0..N {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][n];
                    }
                    stage[n] = y[n] + h * acc;
                }
                k[s] = f(x + C[s] * h, &stage);
            }
            // stage now holds the 5th-order solution (FSAL row)
            let mut err = 0.0;
            for n in 0..N {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * k[j][n];
                }
                let sc = self.tol * (1.0 + y[n].abs().max(stage[n].abs()));
                err += (h * e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                if h < h_min {
                    return Err(Error::StepUnderflow { x });
                }
                continue;
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + h };
                y = stage;
                k[0] = k[6];
                on_step(x, &y);
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    self.h = h;
                }
                h *= grow;
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.1);
                if h < h_min {
                    return Err(Error::StepUnderflow { x });
                }
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut d = Dopri::new(1e-12);
        let y = d.integrate(&f, 0.0, [0.0, 1.0], 10.0, |_, _| {}).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((y[1] - 10f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn lands_exactly_on_endpoint() {
        let f = |_x: f64, _y: &[f64; 1]| [1.0];
        let mut d = Dopri::new(1e-10);
        let mut last = 0.0;
        let y = d.integrate(&f, 0.0, [0.0], 0.37, |x, _| last = x).unwrap();
        assert_eq!(last, 0.37);
        assert!((y[0] - 0.37).abs() < 1e-15);
    }
}
