use crate::error::{KacError, Result};
use crate::numerics::polyfit;
use num_complex::Complex64;

/// Frequency grid: `n` nodes `xi_k = (k - n/2) dxi` covering `[-xi_max, xi_max)`.
///
/// Only the non-negative half (`n/2 + 1` nodes, `0..=xi_max`) is stored; the
/// other half follows from Hermitian symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub n: usize,
    pub xi_max: f64,
}

impl GridParams {
    pub fn new(n: usize, xi_max: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(KacError::Domain(format!("grid size {n} must be a power of two >= 16")));
        }
        if !(xi_max > 0.0 && xi_max.is_finite()) {
            return Err(KacError::Domain(format!("grid half-width {xi_max} must be positive")));
        }
        Ok(Self { n, xi_max })
    }

    /// `2^13` nodes over the datum's default half-width.
    pub fn for_datum(d: &crate::datum::InitialDatum) -> Self {
        Self {
            n: 1 << 13,
            xi_max: d.default_xi_max(),
        }
    }

    pub fn half_len(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn dxi(&self) -> f64 {
        self.xi_max / (self.n / 2) as f64
    }

    pub fn half_nodes(&self) -> Vec<f64> {
        let h = self.dxi();
        (0..self.half_len()).map(|j| j as f64 * h).collect()
    }
}

/// Base index and weights of the interpolation stencil for an even function
/// sampled at `j h`, `j = 0..=last` (`last >= 3`), at `x` in `[0, last h]`.
#[inline(always)]
pub(crate) fn even_stencil(last: usize, inv_h: f64, x: f64) -> (usize, [f64; 4]) {
    let u = x * inv_h;
    if u < 3.0 {
        return (0, near_origin(u * u));
    }
    let mut i = u as usize;
    if i + 2 > last {
        i = last - 2;
    }
    (i - 1, lagrange4(u - i as f64))
}

/// Cubic interpolation of an even function; see [`even_stencil`].
#[inline(always)]
pub(crate) fn interp_even(g: &[f64], inv_h: f64, x: f64) -> f64 {
    let (b, w) = even_stencil(g.len() - 1, inv_h, x);
    w[0] * g[b] + w[1] * g[b + 1] + w[2] * g[b + 2] + w[3] * g[b + 3]
}

/// Same for an odd function (reflection flips the sign).
#[inline(always)]
pub(crate) fn interp_odd(g: &[f64], inv_h: f64, x: f64) -> f64 {
    let last = g.len() - 1;
    let u = x * inv_h;
    let mut i = u as usize;
    if i + 2 > last {
        i = last - 2;
    }
    let w = lagrange4(u - i as f64);
    let gm = if i == 0 { -g[1] } else { g[i - 1] };
    w[0] * gm + w[1] * g[i] + w[2] * g[i + 1] + w[3] * g[i + 2]
}

/// Cubic interpolation in `w = (x/h)^2` through nodes `0, 1, 4, 9`, used on
/// `[0, 3h)`. Exact for even polynomials up to degree six, so the curvature at
/// the origin (the energy) is not polluted by the `O(h^4)` error of the plain
/// stencil.
#[inline(always)]
fn near_origin(w: f64) -> [f64; 4] {
    let (w1, w4, w9) = (w - 1.0, w - 4.0, w - 9.0);
    [
        -w1 * w4 * w9 / 36.0,
        w * w4 * w9 / 24.0,
        -w * w1 * w9 / 60.0,
        w * w1 * w4 / 360.0,
    ]
}

/// Lagrange weights on nodes `-1, 0, 1, 2` at offset `s`.
#[inline(always)]
fn lagrange4(s: f64) -> [f64; 4] {
    let sp = s + 1.0;
    let sm = s - 1.0;
    let sm2 = s - 2.0;
    [
        -s * sm * sm2 / 6.0,
        sp * sm * sm2 / 2.0,
        -sp * s * sm2 / 2.0,
        sp * s * sm / 6.0,
    ]
}

/// Characteristic function sampled on a [`GridParams`] grid at time `t`.
#[derive(Debug, Clone)]
pub struct CfGrid {
    pub params: GridParams,
    half: Vec<Complex64>,
    pub sigma2: f64,
    pub t: f64,
}

/// Outcome of [`CfGrid::check_invariants`].
#[derive(Debug, Clone, Copy)]
pub struct InvariantReport {
    pub mass_error: f64,
    pub max_modulus: f64,
    pub energy_error: f64,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.mass_error <= 1e-10 && self.max_modulus <= 1.0 + 1e-9 && self.energy_error <= 1e-6
    }
}

impl CfGrid {
    pub fn from_fn<F: Fn(f64) -> Complex64>(params: GridParams, sigma2: f64, t: f64, f: F) -> Self {
        let half = params.half_nodes().into_iter().map(f).collect();
        Self {
            params,
            half,
            sigma2,
            t,
        }
    }

    pub fn from_half(params: GridParams, half: Vec<Complex64>, sigma2: f64, t: f64) -> Self {
        assert_eq!(half.len(), params.half_len());
        Self {
            params,
            half,
            sigma2,
            t,
        }
    }

    /// Values at `xi = j dxi`, `j = 0..=n/2`.
    pub fn half_values(&self) -> &[Complex64] {
        &self.half
    }

    pub fn half_nodes(&self) -> Vec<f64> {
        self.params.half_nodes()
    }

    /// The full symmetric node set `xi_k = (k - n/2) dxi`, `k = 0..n`.
    pub fn xi_nodes(&self) -> Vec<f64> {
        let h = self.params.dxi();
        let n = self.params.n as isize;
        (0..n).map(|k| (k - n / 2) as f64 * h).collect()
    }

    /// Values on [`Self::xi_nodes`].
    pub fn values(&self) -> Vec<Complex64> {
        let m = self.params.n / 2;
        (0..self.params.n)
            .map(|k| {
                if k >= m {
                    self.half[k - m]
                } else {
                    self.half[m - k].conj()
                }
            })
            .collect()
    }

    /// Interpolated value at any `|xi| <= xi_max`.
    pub fn eval(&self, xi: f64) -> Result<Complex64> {
        let xm = self.params.xi_max;
        if !(xi.abs() <= xm * (1.0 + 1e-12)) {
            return Err(KacError::OutOfRange { xi, xi_max: xm });
        }
        let x = xi.abs().min(xm);
        let inv_h = 1.0 / self.params.dxi();
        let re: Vec<f64> = self.half.iter().map(|c| c.re).collect();
        let im: Vec<f64> = self.half.iter().map(|c| c.im).collect();
        let v = Complex64::new(interp_even(&re, inv_h, x), interp_odd(&im, inv_h, x));
        Ok(if xi < 0.0 { v.conj() } else { v })
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.half.iter().map(|c| c.re).collect()
    }

    /// `max_k |phi(xi_k) - f(xi_k)|` over the grid.
    pub fn sup_deviation<F: Fn(f64) -> Complex64>(&self, f: F) -> f64 {
        self.half_nodes()
            .iter()
            .zip(&self.half)
            .map(|(x, v)| (v - f(*x)).norm())
            .fold(0.0, f64::max)
    }

    /// `sup_xi |phi(xi) - exp(-sigma^2 xi^2 / 2)|` over the grid.
    pub fn sup_distance_to_maxwellian(&self) -> f64 {
        let s2 = self.sigma2;
        self.sup_deviation(|x| Complex64::new((-0.5 * s2 * x * x).exp(), 0.0))
    }

    /// Even moments `m_0, m_2, ..., m_{2 max_r}` from a least-squares fit of
    /// `Re phi` in `u = xi^2` over `xi <= 1/sigma` (degree 8).
    pub fn even_moments(&self, max_r: usize) -> Result<Vec<f64>> {
        self.even_moments_fit(max_r, 1.0 / self.sigma2.sqrt(), 8.max(max_r + 2))
    }

    /// Same with an explicit fit range and degree.
    pub fn even_moments_fit(&self, max_r: usize, range: f64, degree: usize) -> Result<Vec<f64>> {
        let h = self.params.dxi();
        let xi_fit = range.max((2 * degree + 4) as f64 * h).min(self.params.xi_max);
        let (u, y): (Vec<f64>, Vec<f64>) = self
            .half
            .iter()
            .enumerate()
            .map(|(j, v)| (j as f64 * h, v.re))
            .take_while(|(x, _)| *x <= xi_fit)
            .map(|(x, v)| (x * x, v))
            .unzip();
        let c = polyfit(&u, &y, degree)
            .ok_or_else(|| KacError::Domain("too few nodes near the origin for a moment fit".into()))?;
        let mut fact = 1.0;
        let mut out = Vec::with_capacity(max_r + 1);
        for (r, cr) in c.iter().enumerate().take(max_r + 1) {
            if r > 0 {
                fact *= (2 * r - 1) as f64 * (2 * r) as f64;
            }
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            out.push(sign * fact * cr);
        }
        Ok(out)
    }

    /// Second moment from the curvature at the origin,
    /// `2 (1 - Re phi(h)) / h^2 + m_4 h^2 / 12`.
    pub fn curvature_energy(&self) -> f64 {
        let h = self.params.dxi();
        let m4 = self.even_moments(2).map(|m| m[2]).unwrap_or(0.0);
        2.0 * (1.0 - self.half[1].re) / (h * h) + m4 * h * h / 12.0
    }

    /// Fourth cumulant of the even part, `m_4 - 3 m_2^2`.
    pub fn kappa4(&self) -> Result<f64> {
        let m = self.even_moments(2)?;
        Ok(m[2] - 3.0 * m[1] * m[1])
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let mass_error = (self.half[0] - Complex64::new(1.0, 0.0)).norm();
        let max_modulus = self.half.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let energy_error = (self.curvature_energy() - self.sigma2).abs() / self.sigma2;
        InvariantReport {
            mass_error,
            max_modulus,
            energy_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_even_quadratics_and_accurate_on_cosines() {
        let h = 0.05;
        let g: Vec<f64> = (0..=100).map(|j| 1.0 + 2.0 * (j as f64 * h).powi(2)).collect();
        for x in [0.0, 0.013, 0.07, 2.31, 5.0] {
            assert!((interp_even(&g, 1.0 / h, x) - (1.0 + 2.0 * x * x)).abs() < 1e-12);
        }
        let c: Vec<f64> = (0..=100).map(|j| (j as f64 * h).cos()).collect();
        for x in [0.0, 0.013, 1.234, 4.99] {
            assert!((interp_even(&c, 1.0 / h, x) - f64::cos(x)).abs() < 1e-6);
        }
        let s: Vec<f64> = (0..=100).map(|j| (j as f64 * h).sin()).collect();
        for x in [0.002, 0.03, 2.2] {
            assert!((interp_odd(&s, 1.0 / h, x) - f64::sin(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn hermitian_full_grid() {
        let p = GridParams::new(64, 8.0).unwrap();
        let g = CfGrid::from_fn(p, 1.0, 0.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.3 * x * (-x * x).exp()));
        let xs = g.xi_nodes();
        let vs = g.values();
        assert_eq!(xs.len(), 64);
        assert_eq!(xs[32], 0.0);
        for k in 1..32 {
            assert!((vs[32 + k] - vs[32 - k].conj()).norm() < 1e-15);
        }
        assert!((g.eval(-1.3).unwrap() - g.eval(1.3).unwrap().conj()).norm() < 1e-15);
        assert!(g.eval(8.5).is_err());
    }

    #[test]
    fn moment_fit_recovers_uniform_kurtosis() {
        let p = GridParams::new(1 << 13, 40.0).unwrap();
        let a = 3f64.sqrt();
        let g = CfGrid::from_fn(p, 1.0, 0.0, |x| {
            Complex64::new(if x == 0.0 { 1.0 } else { (a * x).sin() / (a * x) }, 0.0)
        });
        let m = g.even_moments(3).unwrap();
        assert!((m[1] - 1.0).abs() < 1e-10);
        assert!((m[2] - 1.8).abs() < 1e-7);
        assert!((g.kappa4().unwrap() + 1.2).abs() < 1e-7);
        assert!(g.check_invariants().ok());
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(GridParams::new(100, 1.0).is_err());
        assert!(GridParams::new(8, 1.0).is_err());
        assert!(GridParams::new(64, -1.0).is_err());
    }
}
