//! Angular quadrature of the Wild product on a half grid.
//!
//! For Hermitian inputs the circle average reduces to
//! `(2/pi) int_0^{pi/2} Re g1(xi cos) Re g2(xi sin) d theta`, so only real
//! parts on `xi >= 0` are needed.

use super::grid::{even_stencil, interp_even};
use crate::error::{KacError, Result};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule on `[0, pi/2]` with per-node panel counts.
#[derive(Debug, Clone)]
pub struct ThetaRule {
    pub n_min: usize,
    pub n_max: usize,
    pub tol: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Per-node panel counts chosen by doubling.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub panels: Vec<usize>,
    /// Nodes where the cap was reached before the doubling test passed.
    pub unconverged: usize,
}

impl Default for ThetaRule {
    fn default() -> Self {
        Self::new(256, 4096, 1e-10).unwrap()
    }
}

impl ThetaRule {
    pub fn new(n_min: usize, n_max: usize, tol: f64) -> Result<Self> {
        if n_min < 4 || !n_min.is_power_of_two() || !n_max.is_power_of_two() || n_min > n_max {
            return Err(KacError::Domain(format!(
                "panel counts must be powers of two with 4 <= n_min <= n_max (got {n_min}, {n_max})"
            )));
        }
        let d = FRAC_PI_2 / n_max as f64;
        let cos = (0..=n_max).map(|k| (k as f64 * d).cos()).collect();
        let sin = (0..=n_max).map(|k| (k as f64 * d).sin()).collect();
        Ok(Self {
            n_min,
            n_max,
            tol,
            cos,
            sin,
        })
    }

    #[inline]
    fn weight(k: usize, n: usize) -> f64 {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    }

    /// Simpson sum with `n` panels at frequency `xi`; `g2 = None` means `g2 = g1`
    /// and uses the reflection `theta -> pi/2 - theta`.
    #[inline]
    pub(crate) fn quad(&self, g1: &[f64], g2: Option<&[f64]>, inv_h: f64, xi: f64, n: usize) -> f64 {
        let stride = self.n_max / n;
        let mut acc = 0.0;
        match g2 {
            None => {
                let half = n / 2;
                for k in 0..half {
                    let i = k * stride;
                    let a = interp_even(g1, inv_h, xi * self.cos[i]);
                    let b = interp_even(g1, inv_h, xi * self.sin[i]);
                    acc += 2.0 * Self::weight(k, n) * a * b;
                }
                let i = half * stride;
                let a = interp_even(g1, inv_h, xi * self.cos[i]);
                acc += Self::weight(half, n) * a * a;
            }
            Some(g2) => {
                for k in 0..=n {
                    let i = k * stride;
                    let a = interp_even(g1, inv_h, xi * self.cos[i]);
                    let b = interp_even(g2, inv_h, xi * self.sin[i]);
                    acc += Self::weight(k, n) * a * b;
                }
            }
        }
        // (2/pi) * (pi/2)/(3n)
        acc / (3.0 * n as f64)
    }

    /// Doubling from `n_min` until successive sums agree to `tol * max(1, |S|)`.
    pub fn calibrate(&self, g: &[f64], h: f64) -> Calibration {
        let inv_h = 1.0 / h;
        let res: Vec<(usize, bool)> = (0..g.len())
            .into_par_iter()
            .map(|j| {
                let xi = j as f64 * h;
                let mut n = self.n_min;
                let mut s = self.quad(g, None, inv_h, xi, n);
                while n < self.n_max {
                    let s2 = self.quad(g, None, inv_h, xi, 2 * n);
                    if (s2 - s).abs() <= self.tol * s2.abs().max(1.0) {
                        return (n, true);
                    }
                    n *= 2;
                    s = s2;
                }
                (n, false)
            })
            .collect();
        Calibration {
            unconverged: res.iter().filter(|r| !r.1).count(),
            panels: res.into_iter().map(|r| r.0).collect(),
        }
    }

    /// Precomputes the interpolation stencils for nodes `j h`, `j < len`.
    pub fn plan(&self, len: usize, h: f64, panels: &[usize]) -> Plan {
        let inv_h = 1.0 / h;
        let last = len - 1;
        let mut start = Vec::with_capacity(len + 1);
        let total: usize = panels.iter().map(|n| n + 1).sum();
        let mut cos = Vec::with_capacity(total);
        let mut sin = Vec::with_capacity(total);
        start.push(0);
        for (j, &n) in panels.iter().enumerate() {
            let xi = j as f64 * h;
            let stride = self.n_max / n;
            for k in 0..=n {
                let i = k * stride;
                cos.push(even_stencil(last, inv_h, xi * self.cos[i]));
                sin.push(even_stencil(last, inv_h, xi * self.sin[i]));
            }
            start.push(cos.len());
        }
        Plan {
            start,
            panels: panels.to_vec(),
            cos,
            sin,
        }
    }

    /// Wild product of two even real half-grid functions at every node.
    pub fn product(&self, g1: &[f64], g2: Option<&[f64]>, h: f64, panels: &[usize]) -> Vec<f64> {
        let inv_h = 1.0 / h;
        (0..g1.len())
            .into_par_iter()
            .map(|j| self.quad(g1, g2, inv_h, j as f64 * h, panels[j]))
            .collect()
    }
}

/// Interpolation stencils for every (node, angle) pair of a [`ThetaRule`]
/// with fixed panel counts. Same results as [`ThetaRule::product`], faster
/// when many products share the panels.
#[derive(Debug, Clone)]
pub struct Plan {
    start: Vec<usize>,
    panels: Vec<usize>,
    cos: Vec<(usize, [f64; 4])>,
    sin: Vec<(usize, [f64; 4])>,
}

#[inline(always)]
fn apply(g: &[f64], st: &(usize, [f64; 4])) -> f64 {
    let (b, w) = st;
    w[0] * g[*b] + w[1] * g[b + 1] + w[2] * g[b + 2] + w[3] * g[b + 3]
}

impl Plan {
    /// Bytes held by the stencil tables.
    pub fn footprint(&self) -> usize {
        2 * self.cos.len() * std::mem::size_of::<(usize, [f64; 4])>()
    }

    fn node(&self, j: usize, g1: &[f64], g2: Option<&[f64]>) -> f64 {
        let n = self.panels[j];
        let c = &self.cos[self.start[j]..self.start[j + 1]];
        let s = &self.sin[self.start[j]..self.start[j + 1]];
        let mut acc = 0.0;
        match g2 {
            None => {
                let half = n / 2;
                for k in 0..half {
                    acc += 2.0 * ThetaRule::weight(k, n) * apply(g1, &c[k]) * apply(g1, &s[k]);
                }
                let a = apply(g1, &c[half]);
                acc += ThetaRule::weight(half, n) * a * a;
            }
            Some(g2) => {
                for k in 0..=n {
                    acc += ThetaRule::weight(k, n) * apply(g1, &c[k]) * apply(g2, &s[k]);
                }
            }
        }
        acc / (3.0 * n as f64)
    }

    pub fn product(&self, g1: &[f64], g2: Option<&[f64]>) -> Vec<f64> {
        (0..self.panels.len())
            .into_par_iter()
            .map(|j| self.node(j, g1, g2))
            .collect()
    }
}
