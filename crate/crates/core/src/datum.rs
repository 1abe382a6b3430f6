//! Initial data: catalog laws with closed-form densities, characteristic
//! functions and moments, plus symmetrization, odd perturbations of the
//! Gaussian and user tables.

use crate::cumulants::{
    moments_to_cumulants, CumulantVector, LogCfRemainder, MomentVector,
    MAX_ORDER,
};
use crate::error::{KacError, Result};
use crate::numerics::gauss_legendre;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// A probability law on the line.
#[derive(Debug, Clone)]
pub enum Law {
    Gaussian { sigma: f64, mean: f64 },
    /// Uniform on `[-a, a]`.
    Uniform { a: f64 },
    /// Density `exp(-|v|/b) / (2b)`.
    Laplace { b: f64 },
    /// Equal atoms at `-c` and `c`.
    TwoPoint { c: f64 },
    Mixture(Vec<(f64, Law)>),
    /// `base + epsilon v exp(-v^2/scale^2)`.
    OddPerturbed {
        base: Box<Law>,
        scale: f64,
        epsilon: f64,
        accept_bound: f64,
    },
    Table(Table),
    /// Even part `(mu(B) + mu(-B)) / 2` of another law.
    Symmetrized(Box<Law>),
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(8))
}

fn gl12() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(12))
}

fn double_factorial_odd(r: usize) -> f64 {
    // (r-1)!! for even r
    (1..r).step_by(2).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn odd_part_cf(scale: f64, epsilon: f64, xi: f64) -> Complex64 {
    let s3 = scale.powi(3);
    Complex64::new(
        0.0,
        epsilon * PI.sqrt() * s3 * xi / 2.0 * (-scale * scale * xi * xi / 4.0).exp(),
    )
}

impl Law {
    pub fn cf(&self, xi: f64) -> Complex64 {
        match self {
            Law::Gaussian { sigma, mean } => {
                let m = (-0.5 * sigma * sigma * xi * xi).exp();
                Complex64::from_polar(m, mean * xi)
            }
            Law::Uniform { a } => {
                let x = a * xi;
                let v = if x.abs() < 1e-4 {
                    1.0 - x * x / 6.0 + x.powi(4) / 120.0
                } else {
                    x.sin() / x
                };
                Complex64::new(v, 0.0)
            }
            Law::Laplace { b } => Complex64::new(1.0 / (1.0 + b * b * xi * xi), 0.0),
            Law::TwoPoint { c } => Complex64::new((c * xi).cos(), 0.0),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| l.cf(xi) * *w).sum(),
            Law::OddPerturbed {
                base,
                scale,
                epsilon,
                ..
            } => base.cf(xi) + odd_part_cf(*scale, *epsilon, xi),
            Law::Table(t) => t.cf(xi),
            Law::Symmetrized(inner) => Complex64::new(inner.cf(xi).re, 0.0),
        }
    }

    /// Closed-form derivative of the characteristic function.
    pub fn cf_derivative(&self, xi: f64) -> Complex64 {
        match self {
            Law::Gaussian { sigma, mean } => {
                Complex64::new(-sigma * sigma * xi, *mean) * self.cf(xi)
            }
            Law::Uniform { a } => {
                let x = a * xi;
                let v = if x.abs() < 1e-4 {
                    a * (-x / 3.0 + x.powi(3) / 30.0)
                } else {
                    a * (x * x.cos() - x.sin()) / (x * x)
                };
                Complex64::new(v, 0.0)
            }
            Law::Laplace { b } => {
                let d = 1.0 + b * b * xi * xi;
                Complex64::new(-2.0 * b * b * xi / (d * d), 0.0)
            }
            Law::TwoPoint { c } => Complex64::new(-c * (c * xi).sin(), 0.0),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| l.cf_derivative(xi) * *w).sum(),
            Law::OddPerturbed {
                base,
                scale,
                epsilon,
                ..
            } => {
                let s2 = scale * scale;
                let d = epsilon * PI.sqrt() * scale.powi(3) / 2.0
                    * (-s2 * xi * xi / 4.0).exp()
                    * (1.0 - s2 * xi * xi / 2.0);
                base.cf_derivative(xi) + Complex64::new(0.0, d)
            }
            Law::Table(t) => t.cf_derivative(xi),
            Law::Symmetrized(inner) => Complex64::new(inner.cf_derivative(xi).re, 0.0),
        }
    }

    /// Density at `v`, `None` for laws with atoms.
    pub fn density(&self, v: f64) -> Option<f64> {
        match self {
            Law::Gaussian { sigma, mean } => {
                let z = (v - mean) / sigma;
                Some((-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt()))
            }
            Law::Uniform { a } => Some(if v.abs() < *a {
                0.5 / a
            } else if v.abs() == *a {
                0.25 / a
            } else {
                0.0
            }),
            Law::Laplace { b } => Some((-v.abs() / b).exp() / (2.0 * b)),
            Law::TwoPoint { .. } => None,
            Law::Mixture(parts) => {
                let mut acc = 0.0;
                for (w, l) in parts {
                    acc += w * l.density(v)?;
                }
                Some(acc)
            }
            Law::OddPerturbed {
                base,
                scale,
                epsilon,
                ..
            } => Some(base.density(v)? + epsilon * v * (-(v * v) / (scale * scale)).exp()),
            Law::Table(t) => Some(t.density(v)),
            Law::Symmetrized(inner) => Some(0.5 * (inner.density(v)? + inner.density(-v)?)),
        }
    }

    /// Raw moment `E X^r`.
    pub fn raw_moment(&self, r: usize) -> f64 {
        if r == 0 {
            return 1.0;
        }
        match self {
            Law::Gaussian { sigma, mean } => (0..=r)
                .filter(|j| j % 2 == 0)
                .map(|j| {
                    binomial(r, j)
                        * mean.powi((r - j) as i32)
                        * sigma.powi(j as i32)
                        * double_factorial_odd(j)
                })
                .sum(),
            Law::Uniform { a } => {
                if r % 2 == 1 {
                    0.0
                } else {
                    a.powi(r as i32) / (r + 1) as f64
                }
            }
            Law::Laplace { b } => {
                if r % 2 == 1 {
                    0.0
                } else {
                    (1..=r).map(|i| i as f64).product::<f64>() * b.powi(r as i32)
                }
            }
            Law::TwoPoint { c } => {
                if r % 2 == 1 {
                    0.0
                } else {
                    c.powi(r as i32)
                }
            }
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.raw_moment(r)).sum(),
            Law::OddPerturbed {
                base,
                scale,
                epsilon,
                ..
            } => {
                let mut m = base.raw_moment(r);
                if r % 2 == 1 {
                    let k = (r - 1) / 2;
                    m += epsilon * scale.powi(2 * k as i32 + 3) * gamma(k as f64 + 1.5);
                }
                m
            }
            Law::Table(t) => t.moment(|v| v.powi(r as i32)),
            Law::Symmetrized(inner) => {
                if r % 2 == 1 {
                    0.0
                } else {
                    inner.raw_moment(r)
                }
            }
        }
    }

    /// Absolute moment `E |X|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match self {
            Law::Gaussian { sigma, mean } if *mean == 0.0 => {
                sigma.powf(p) * 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt()
            }
            Law::Gaussian { sigma, mean } => {
                let f = |v: f64| v.abs().powf(p) * self.density(v).unwrap();
                let lo = mean - 40.0 * sigma;
                let hi = mean + 40.0 * sigma;
                let mut acc = 0.0;
                let n = 4000;
                let (x, w) = gl8();
                for i in 0..n {
                    let a = lo + (hi - lo) * i as f64 / n as f64;
                    let b = lo + (hi - lo) * (i + 1) as f64 / n as f64;
                    for (xi, wi) in x.iter().zip(w) {
                        acc += wi * 0.5 * (b - a) * f(0.5 * (a + b) + 0.5 * (b - a) * xi);
                    }
                }
                acc
            }
            Law::Uniform { a } => a.powf(p) / (p + 1.0),
            Law::Laplace { b } => gamma(p + 1.0) * b.powf(p),
            Law::TwoPoint { c } => c.powf(p),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.abs_moment(p)).sum(),
            Law::OddPerturbed { base, .. } => base.abs_moment(p),
            Law::Table(t) => t.moment(|v| v.abs().powf(p)),
            Law::Symmetrized(inner) => inner.abs_moment(p),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Law::Gaussian { mean, .. } => *mean == 0.0,
            Law::Uniform { .. } | Law::Laplace { .. } | Law::TwoPoint { .. } => true,
            Law::Mixture(parts) => parts.iter().all(|(_, l)| l.is_symmetric()),
            Law::OddPerturbed { base, epsilon, .. } => *epsilon == 0.0 && base.is_symmetric(),
            Law::Table(t) => t.is_symmetric(),
            Law::Symmetrized(_) => true,
        }
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            Law::Uniform { a } => vec![-a, *a],
            Law::Laplace { .. } => vec![0.0],
            Law::Mixture(parts) => parts.iter().flat_map(|(_, l)| l.breakpoints()).collect(),
            Law::OddPerturbed { base, .. } => base.breakpoints(),
            Law::Table(t) => vec![t.v[0], *t.v.last().unwrap()],
            Law::Symmetrized(inner) => inner
                .breakpoints()
                .into_iter()
                .flat_map(|b| [b, -b])
                .collect(),
            _ => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn is_gaussian_like(&self) -> bool {
        match self {
            Law::Gaussian { .. } => true,
            Law::OddPerturbed { base, .. } | Law::Symmetrized(base) => base.is_gaussian_like(),
            _ => false,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Law::Gaussian { sigma, mean } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
            Law::Uniform { a } => rng.gen_range(-a..*a),
            Law::Laplace { b } => {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let e = -b * u.ln();
                if rng.gen::<bool>() {
                    e
                } else {
                    -e
                }
            }
            Law::TwoPoint { c } => {
                if rng.gen::<bool>() {
                    *c
                } else {
                    -c
                }
            }
            Law::Mixture(parts) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (w, l) in parts {
                    acc += w;
                    if u < acc {
                        return l.sample(rng);
                    }
                }
                parts.last().unwrap().1.sample(rng)
            }
            Law::OddPerturbed {
                base,
                scale,
                epsilon,
                accept_bound,
            } => loop {
                let v = base.sample(rng);
                let g = base.density(v).unwrap_or(0.0);
                if g <= 0.0 {
                    continue;
                }
                let ratio = 1.0 + epsilon * v * (-(v * v) / (scale * scale)).exp() / g;
                if rng.gen::<f64>() * accept_bound <= ratio {
                    return v;
                }
            },
            Law::Table(t) => t.sample(rng),
            Law::Symmetrized(inner) => {
                let v = inner.sample(rng);
                if rng.gen::<bool>() {
                    v
                } else {
                    -v
                }
            }
        }
    }
}

/// Piecewise-linear density through tabulated points, zero outside.
#[derive(Debug, Clone)]
pub struct Table {
    v: Vec<f64>,
    f: Vec<f64>,
    cdf: Vec<f64>,
}

impl Table {
    /// Builds and normalizes a table; `v` strictly increasing, `f >= 0`.
    pub fn new(v: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if v.len() < 2 || v.len() != f.len() {
            return Err(KacError::Domain("table needs >= 2 matching (v, f) rows".into()));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KacError::Domain("table abscissae must increase strictly".into()));
        }
        if f.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(KacError::Domain("table density must be finite and >= 0".into()));
        }
        let mut cdf = vec![0.0];
        for i in 0..v.len() - 1 {
            let seg = 0.5 * (f[i] + f[i + 1]) * (v[i + 1] - v[i]);
            cdf.push(cdf[i] + seg);
        }
        let mass = *cdf.last().unwrap();
        if !(mass > 0.0) {
            return Err(KacError::Domain("table density has zero mass".into()));
        }
        let f = f.into_iter().map(|x| x / mass).collect();
        let cdf = cdf.into_iter().map(|x| x / mass).collect();
        Ok(Self { v, f, cdf })
    }

    /// Reads a two-column `v,f` CSV; a non-numeric first line is a header.
    pub fn from_csv(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut v = Vec::new();
        let mut f = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(KacError::Config(format!("{}:{}: expected v,f", path.display(), i + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    v.push(a);
                    f.push(b);
                }
                _ if v.is_empty() => continue,
                _ => {
                    return Err(KacError::Config(format!(
                        "{}:{}: cannot parse numbers",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Self::new(v, f)
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.v, &self.f)
    }

    fn density(&self, x: f64) -> f64 {
        if x < self.v[0] || x > *self.v.last().unwrap() {
            return 0.0;
        }
        let i = match self.v.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.f[i],
            Err(i) => i - 1,
        };
        let s = (x - self.v[i]) / (self.v[i + 1] - self.v[i]);
        self.f[i] * (1.0 - s) + self.f[i + 1] * s
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.v.len() - 1).map(move |i| (self.v[i], self.v[i + 1], self.f[i], self.f[i + 1]))
    }

    fn moment<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let (x, w) = gl12();
        let mut acc = 0.0;
        for (a, b, fa, fb) in self.segments() {
            // Split at the origin so |v|^p stays smooth on each piece.
            let pieces: Vec<(f64, f64)> = if a < 0.0 && b > 0.0 {
                vec![(a, 0.0), (0.0, b)]
            } else {
                vec![(a, b)]
            };
            for (lo, hi) in pieces {
                let half = 0.5 * (hi - lo);
                for (xi, wi) in x.iter().zip(w) {
                    let v = 0.5 * (lo + hi) + half * xi;
                    let s = (v - a) / (b - a);
                    acc += wi * half * g(v) * (fa * (1.0 - s) + fb * s);
                }
            }
        }
        acc
    }

    fn fourier<G: Fn(f64) -> Complex64>(&self, xi: f64, weight: G) -> Complex64 {
        let (x, w) = gl8();
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b, fa, fb) in self.segments() {
            let parts = ((xi.abs() * (b - a)).ceil() as usize).max(1);
            let h = (b - a) / parts as f64;
            for p in 0..parts {
                let lo = a + p as f64 * h;
                for (xn, wn) in x.iter().zip(w) {
                    let v = lo + 0.5 * h * (1.0 + xn);
                    let s = (v - a) / (b - a);
                    let dens = fa * (1.0 - s) + fb * s;
                    acc += weight(v) * Complex64::from_polar(wn * 0.5 * h * dens, xi * v);
                }
            }
        }
        acc
    }

    fn cf(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.fourier(xi, |_| Complex64::new(1.0, 0.0))
    }

    fn cf_derivative(&self, xi: f64) -> Complex64 {
        self.fourier(xi, |v| Complex64::new(0.0, v))
    }

    fn is_symmetric(&self) -> bool {
        let fmax = self.f.iter().cloned().fold(0.0, f64::max);
        self.v
            .iter()
            .zip(&self.f)
            .all(|(x, y)| (self.density(-x) - y).abs() <= 1e-12 * fmax)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let i = match self.cdf.binary_search_by(|p| p.total_cmp(&u)) {
            Ok(i) => return self.v[i.min(self.v.len() - 1)],
            Err(i) => (i - 1).min(self.v.len() - 2),
        };
        let (a, b, fa, fb) = (self.v[i], self.v[i + 1], self.f[i], self.f[i + 1]);
        let target = u - self.cdf[i];
        let slope = (fb - fa) / (b - a);
        let x = if slope.abs() < 1e-14 {
            if fa > 0.0 {
                target / fa
            } else {
                0.5 * (b - a)
            }
        } else {
            (-fa + (fa * fa + 2.0 * slope * target).max(0.0).sqrt()) / slope
        };
        (a + x).clamp(a, b)
    }
}

/// An initial datum with its moments and cumulants to order 20.
#[derive(Debug, Clone)]
pub struct InitialDatum {
    pub name: String,
    pub law: Law,
    pub moments: MomentVector,
    pub cumulants: CumulantVector,
    /// A `p` for which `|xi|^p |phi_0(xi)|` stays bounded, if known.
    pub tail_order: Option<f64>,
    pub symmetric: bool,
}

impl InitialDatum {
    pub fn from_law(name: impl Into<String>, law: Law, tail_order: Option<f64>) -> Result<Self> {
        let m: Vec<f64> = (0..=MAX_ORDER).map(|r| law.raw_moment(r)).collect();
        let moments = MomentVector::new(m)?;
        if !(moments.get(2) > 0.0) {
            return Err(KacError::Domain("initial datum needs a positive second moment".into()));
        }
        let cumulants = moments_to_cumulants(&moments, MAX_ORDER)?;
        let symmetric = law.is_symmetric();
        Ok(Self {
            name: name.into(),
            law,
            moments,
            cumulants,
            tail_order,
            symmetric,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::gaussian_shifted(sigma, 0.0)
    }

    pub fn gaussian_shifted(sigma: f64, mean: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mean.is_finite() {
            return Err(KacError::Domain(format!("bad Gaussian parameters ({sigma}, {mean})")));
        }
        let name = if mean == 0.0 { "gaussian" } else { "gaussian-shifted" };
        let mut d = Self::from_law(name, Law::Gaussian { sigma, mean }, Some(f64::INFINITY))?;
        if mean == 0.0 {
            // Keep the Gaussian cumulants exact.
            let mut k = vec![0.0; MAX_ORDER + 1];
            k[2] = sigma * sigma;
            d.cumulants = CumulantVector::from_values(k);
        }
        Ok(d)
    }

    /// Uniform on `[-a, a]`.
    pub fn uniform(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(KacError::Domain("uniform half-width must be positive".into()));
        }
        Self::from_law("uniform", Law::Uniform { a }, Some(1.0))
    }

    /// Uniform on `[-sqrt 3, sqrt 3]` (unit variance).
    pub fn uniform_unit() -> Self {
        Self::uniform(3f64.sqrt()).unwrap()
    }

    pub fn laplace(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(KacError::Domain("Laplace scale must be positive".into()));
        }
        Self::from_law("laplace", Law::Laplace { b }, Some(1.0))
    }

    /// Laplace with `b = 1/sqrt 2` (unit variance).
    pub fn laplace_unit() -> Self {
        Self::laplace(0.5f64.sqrt()).unwrap()
    }

    pub fn two_point(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(KacError::Domain("two-point atom must be positive".into()));
        }
        Self::from_law("two-point", Law::TwoPoint { c }, None)
    }

    pub fn table(v: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        Self::from_law("table", Law::Table(Table::new(v, f)?), None)
    }

    pub fn cf(&self, xi: f64) -> Complex64 {
        self.law.cf(xi)
    }

    pub fn cf_derivative(&self, xi: f64) -> Complex64 {
        self.law.cf_derivative(xi)
    }

    pub fn density(&self, v: f64) -> Option<f64> {
        self.law.density(v)
    }

    pub fn has_density(&self) -> bool {
        self.law.density(0.0).is_some()
    }

    /// Energy `sigma^2 = int v^2 mu_0(dv)`, conserved by the flow.
    pub fn sigma2(&self) -> f64 {
        self.moments.get(2)
    }

    pub fn abs_moment(&self, p: f64) -> f64 {
        self.law.abs_moment(p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.law.sample(rng)
    }

    /// Default half-width of the frequency grid.
    pub fn default_xi_max(&self) -> f64 {
        let s2 = self.sigma2();
        let s = s2.sqrt();
        if self.law.is_gaussian_like() {
            12.0 / s
        } else {
            40.0 / s * s2.max(1.0)
        }
    }

    /// Remainders `eps_k`, `rho_k` of `log psi` for this (symmetric) law.
    pub fn log_cf_remainder(&self) -> Result<LogCfRemainder> {
        if !self.symmetric {
            return Err(KacError::Domain(format!(
                "{} is not symmetric; symmetrize it first",
                self.name
            )));
        }
        let law = self.law.clone();
        LogCfRemainder::new(
            &self.cumulants,
            self.moments.get(4),
            Box::new(move |x: f64| law.cf(x).re.ln()),
        )
    }
}

/// Even part of a datum.
pub fn symmetrize(d: &InitialDatum) -> InitialDatum {
    if d.symmetric {
        return d.clone();
    }
    let law = match &d.law {
        Law::OddPerturbed { base, .. } if base.is_symmetric() => (**base).clone(),
        other => Law::Symmetrized(Box::new(other.clone())),
    };
    let even: Vec<f64> = (0..=MAX_ORDER)
        .map(|r| if r % 2 == 1 { 0.0 } else { d.moments.get(r) })
        .collect();
    let moments = MomentVector::new(even).expect("even part of valid moments");
    let cumulants = if matches!(law, Law::Gaussian { .. }) {
        let mut k = vec![0.0; MAX_ORDER + 1];
        k[2] = moments.get(2);
        CumulantVector::from_values(k)
    } else {
        moments_to_cumulants(&moments, MAX_ORDER).expect("order within range")
    };
    InitialDatum {
        name: format!("{}-sym", d.name),
        law,
        moments,
        cumulants,
        tail_order: d.tail_order,
        symmetric: true,
    }
}

/// `kappa_4` of the symmetrized datum, `m_4 - 3 m_2^2`.
pub fn kappa4_symmetrized(d: &InitialDatum) -> Result<f64> {
    if d.moments.order() < 4 {
        return Err(KacError::UnsupportedOrder {
            order: 4,
            max: d.moments.order(),
        });
    }
    let m2 = d.moments.get(2);
    Ok(d.moments.get(4) - 3.0 * m2 * m2)
}

/// Unit-variance `5/7 Uniform + 2/7 Laplace`, whose fourth cumulant vanishes.
pub fn make_zero_kurtosis_mixture() -> InitialDatum {
    let law = Law::Mixture(vec![
        (5.0 / 7.0, Law::Uniform { a: 3f64.sqrt() }),
        (2.0 / 7.0, Law::Laplace { b: 0.5f64.sqrt() }),
    ]);
    let mut d = InitialDatum::from_law("mixture-zero-k4", law, Some(1.0)).unwrap();
    // m_4 = 3 exactly; pin kappa_4 to zero instead of rounding residue.
    let mut k = d.cumulants.as_slice().to_vec();
    k[4] = 0.0;
    d.cumulants = CumulantVector::from_values(k);
    d
}

/// A Gaussian plus the odd signed perturbation `epsilon v exp(-v^2/sigma^2)`.
#[derive(Debug, Clone)]
pub struct SignedPerturbation {
    pub base: InitialDatum,
    pub sigma: f64,
    pub epsilon: f64,
    datum: InitialDatum,
}

impl SignedPerturbation {
    pub fn odd_part(&self, v: f64) -> f64 {
        self.epsilon * v * (-(v * v) / (self.sigma * self.sigma)).exp()
    }

    pub fn datum(&self) -> &InitialDatum {
        &self.datum
    }

    pub fn into_datum(self) -> InitialDatum {
        self.datum
    }

    /// `int |o| = |epsilon| sigma^2`.
    pub fn odd_mass(&self) -> f64 {
        self.epsilon.abs() * self.sigma * self.sigma
    }

    /// Total variation distance between the perturbed law and its base.
    pub fn tv_to_base(&self) -> f64 {
        0.5 * self.odd_mass()
    }
}

/// Largest `|epsilon|` keeping `g_sigma + epsilon v exp(-v^2/sigma^2)` nonnegative,
/// evaluated on a grid over `[-12 sigma, 12 sigma]`.
pub fn max_odd_amplitude(sigma: f64) -> f64 {
    let g = Law::Gaussian { sigma, mean: 0.0 };
    (1..=12_000)
        .map(|i| {
            let v = 12.0 * sigma * i as f64 / 12_000.0;
            g.density(v).unwrap() / (v * (-(v * v) / (sigma * sigma)).exp())
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn make_odd_perturbed_gaussian(sigma: f64, epsilon: f64) -> Result<SignedPerturbation> {
    let base = InitialDatum::gaussian(sigma)?;
    if !epsilon.is_finite() {
        return Err(KacError::Domain("amplitude must be finite".into()));
    }
    let max = max_odd_amplitude(sigma);
    if epsilon.abs() > max {
        return Err(KacError::Amplitude { epsilon, max });
    }
    if epsilon == 0.0 {
        return Ok(SignedPerturbation {
            datum: base.clone(),
            base,
            sigma,
            epsilon,
        });
    }
    let accept_bound = 1.0 + epsilon.abs() * sigma * sigma * (2.0 * PI).sqrt() * (-0.5f64).exp();
    let law = Law::OddPerturbed {
        base: Box::new(base.law.clone()),
        scale: sigma,
        epsilon,
        accept_bound,
    };
    let datum = InitialDatum::from_law("odd-perturbed", law, Some(f64::INFINITY))?;
    Ok(SignedPerturbation {
        base,
        sigma,
        epsilon,
        datum,
    })
}

/// Grid check of `|xi|^p |phi_0(xi)| -> 0`; always heuristic.
#[derive(Debug, Clone, Copy)]
pub struct TailCheck {
    pub holds: bool,
    /// Grid supremum of `|xi|^p |phi_0|` over `[1, xi_max]`.
    pub l_p: f64,
}

/// Reports `L_p` on `[1, xi_max]` and whether the envelope of `|xi|^p |phi_0|`
/// is non-increasing near `xi_max` (sup over the last half no larger than
/// over the preceding quarter).
pub fn check_tail_condition(d: &InitialDatum, p: f64, xi_max: f64) -> TailCheck {
    let n = 20_000;
    let xs: Vec<f64> = (0..=n)
        .map(|i| 1.0 + (xi_max - 1.0) * i as f64 / n as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|x| x.powf(p) * d.cf(*x).norm()).collect();
    let l_p = vals.iter().cloned().fold(0.0, f64::max);
    let sup_in = |lo: f64, hi: f64| {
        xs.iter()
            .zip(&vals)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let late = sup_in(0.5 * xi_max, xi_max);
    let early = sup_in(0.25 * xi_max, 0.5 * xi_max);
    TailCheck {
        holds: late <= early * (1.0 + 1e-9) + 1e-300,
        l_p,
    }
}

/// The catalog used by examples and the experiment driver.
pub fn catalog() -> Vec<InitialDatum> {
    vec![
        InitialDatum::gaussian(1.0).unwrap(),
        InitialDatum::uniform_unit(),
        InitialDatum::laplace_unit(),
        InitialDatum::two_point(1.0).unwrap(),
        make_zero_kurtosis_mixture(),
        make_odd_perturbed_gaussian(1.0, 0.3).unwrap().into_datum(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::adaptive_simpson;
    use proptest::prelude::*;
    use rand::SeedableRng;

    // Unit-width pieces plus the law's breakpoints, so adaptive Simpson
    // cannot step over the bulk of the mass.
    fn pieces(d: &InitialDatum, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=((hi - lo) as usize)).map(|i| lo + i as f64).collect();
        pts.extend(d.law.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn numeric_moment(d: &InitialDatum, r: i32, lo: f64, hi: f64) -> f64 {
        pieces(d, lo, hi)
            .windows(2)
            .map(|w| {
                adaptive_simpson(
                    &|v: f64| v.powi(r) * d.density(v).unwrap(),
                    w[0],
                    w[1],
                    1e-13,
                )
            })
            .sum()
    }

    #[test]
    fn catalog_moments_match_quadrature() {
        for d in catalog().iter().filter(|d| d.has_density()) {
            for r in [0, 1, 2, 3, 4, 5, 6] {
                let q = numeric_moment(d, r, -60.0, 60.0);
                let m = d.moments.get(r as usize);
                assert!(
                    (q - m).abs() <= 1e-6 * m.abs().max(1.0),
                    "{} r={r}: {q} vs {m}",
                    d.name
                );
            }
        }
    }

    #[test]
    fn mixture_moments() {
        let d = make_zero_kurtosis_mixture();
        assert!((d.sigma2() - 1.0).abs() < 1e-14);
        assert!(kappa4_symmetrized(&d).unwrap().abs() < 1e-12);
        // 5/7 * 27/7 + 2/7 * 6! b^6 with b^2 = 1/2.
        let m6 = 5.0 / 7.0 * 27.0 / 7.0 + 2.0 / 7.0 * 90.0;
        assert!((d.moments.get(6) - m6).abs() < 1e-12);
        let q = numeric_moment(&d, 6, -60.0, 60.0);
        assert!((q - m6).abs() < 1e-6 * m6);
    }

    #[test]
    fn kappa4_examples() {
        let u = InitialDatum::uniform_unit();
        assert!((kappa4_symmetrized(&u).unwrap() + 1.2).abs() < 1e-14);
        assert_eq!(kappa4_symmetrized(&InitialDatum::gaussian(1.3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn cf_properties() {
        for d in catalog() {
            assert!((d.cf(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-14, "{}", d.name);
            for i in 0..400 {
                let x = -20.0 + 0.1 * i as f64;
                let c = d.cf(x);
                assert!(c.norm() <= 1.0 + 1e-12);
                if d.symmetric {
                    assert!(c.im.abs() < 1e-15);
                    assert!((c - d.cf(-x)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn cf_derivatives_match_differences() {
        for d in catalog() {
            for x in [0.0, 0.3, 1.1, 2.7, -4.2] {
                let h = 1e-5;
                let fd = (d.cf(x + h) - d.cf(x - h)) / (2.0 * h);
                assert!((fd - d.cf_derivative(x)).norm() < 1e-8, "{} at {x}", d.name);
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in catalog().iter().filter(|d| d.has_density()) {
            let q = numeric_moment(d, 0, -60.0, 60.0);
            assert!((q - 1.0).abs() < 1e-8, "{}", d.name);
        }
    }

    #[test]
    fn cf_density_duality() {
        // Direct Fourier integral of the density against the closed-form cf.
        for d in catalog().iter().filter(|d| d.has_density()) {
            for xi in [0.5, 1.3, 3.0] {
                let re = numeric_fourier(d, xi, true);
                let im = numeric_fourier(d, xi, false);
                let c = d.cf(xi);
                assert!((re - c.re).abs() < 1e-8 && (im - c.im).abs() < 1e-8, "{}", d.name);
            }
        }
    }

    fn numeric_fourier(d: &InitialDatum, xi: f64, real: bool) -> f64 {
        pieces(d, -40.0, 40.0)
            .windows(2)
            .map(|w| {
                adaptive_simpson(
                    &|v: f64| {
                        let f = d.density(v).unwrap();
                        if real {
                            f * (xi * v).cos()
                        } else {
                            f * (xi * v).sin()
                        }
                    },
                    w[0],
                    w[1],
                    1e-12,
                )
            })
            .sum()
    }

    #[test]
    fn symmetrization() {
        let u = InitialDatum::uniform_unit();
        let s = symmetrize(&u);
        assert_eq!(s.name, u.name);
        let g = InitialDatum::gaussian_shifted(1.2, 0.7).unwrap();
        let gs = symmetrize(&g);
        for x in [0.0f64, 0.4, 1.9, 3.3] {
            let expect = (-0.5 * 1.44 * x * x).exp() * (0.7 * x).cos();
            assert!((gs.cf(x).re - expect).abs() < 1e-15);
            assert_eq!(gs.cf(x).im, 0.0);
        }
        let twice = symmetrize(&gs);
        for x in [0.3, 2.0] {
            assert_eq!(twice.cf(x), gs.cf(x));
            assert_eq!(twice.density(x), gs.density(x));
        }
        for r in 0..=8 {
            let e = if r % 2 == 1 { 0.0 } else { g.moments.get(r) };
            assert_eq!(gs.moments.get(r), e);
        }
    }

    #[test]
    fn odd_perturbation() {
        let z = make_odd_perturbed_gaussian(1.0, 0.0).unwrap();
        assert!(z.datum().symmetric);
        let p = make_odd_perturbed_gaussian(1.0, 0.4).unwrap();
        let s = symmetrize(p.datum());
        assert!(matches!(s.law, Law::Gaussian { .. }));
        for i in 0..100 {
            let v = -5.0 + 0.1 * i as f64;
            assert!((s.density(v).unwrap() - p.base.density(v).unwrap()).abs() < 1e-12);
        }
        // int |o| = epsilon for sigma = 1, checked by quadrature.
        let q: f64 = (-20..20)
            .map(|i| adaptive_simpson(&|v: f64| p.odd_part(v).abs(), i as f64, i as f64 + 1.0, 1e-14))
            .sum();
        assert!((q - 0.4).abs() < 1e-10);
        assert!((p.tv_to_base() - 0.2).abs() < 1e-15);
        let odd_int = adaptive_simpson(&|v: f64| p.odd_part(v), -20.0, 20.0, 1e-13);
        assert!(odd_int.abs() < 1e-10);
        let max = max_odd_amplitude(1.0);
        assert!((max - (0.5f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-6);
        match make_odd_perturbed_gaussian(1.0, 0.7) {
            Err(KacError::Amplitude { max: m, .. }) => assert!((m - max).abs() < 1e-15),
            other => panic!("expected amplitude error, got {other:?}"),
        }
    }

    #[test]
    fn tail_checks() {
        let g = InitialDatum::gaussian(1.0).unwrap();
        let c = check_tail_condition(&g, 1.0, 50.0);
        assert!(c.holds);
        assert!((c.l_p - (-0.5f64).exp()).abs() < 1e-6);
        let u = InitialDatum::uniform_unit();
        let c = check_tail_condition(&u, 1.0, 50.0);
        assert!(c.holds && c.l_p <= 1.0 / 3f64.sqrt() + 1e-12);
        let t = InitialDatum::two_point(1.0).unwrap();
        assert!(!check_tail_condition(&t, 0.5, 50.0).holds);
    }

    #[test]
    fn table_round_trip() {
        // A tabulated triangle density on [-1, 1].
        let v: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
        let f: Vec<f64> = v.iter().map(|x| 1.0 - x.abs()).collect();
        let d = InitialDatum::table(v, f).unwrap();
        assert!(d.symmetric);
        assert!((d.sigma2() - 1.0 / 6.0).abs() < 1e-12);
        let xi: f64 = 2.5;
        let expect = 2.0 * (1.0 - xi.cos()) / (xi * xi);
        assert!((d.cf(xi).re - expect).abs() < 1e-10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..20_000).map(|_| d.sample(&mut rng)).collect();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((m2 - 1.0 / 6.0).abs() < 0.01);
    }

    #[test]
    fn samplers_match_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in catalog() {
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            for r in [1i32, 2, 3] {
                let emp = xs.iter().map(|x| x.powi(r)).sum::<f64>() / n as f64;
                let var = d.moments.get(2 * r as usize) - d.moments.get(r as usize).powi(2);
                let se = (var / n as f64).sqrt();
                assert!(
                    (emp - d.moments.get(r as usize)).abs() < 5.0 * se + 1e-12,
                    "{} r={r}",
                    d.name
                );
            }
        }
    }

    proptest! {
        #[test]
        fn symmetrize_is_idempotent(sigma in 0.3f64..3.0, mean in -2.0f64..2.0, x in -5.0f64..5.0) {
            let d = InitialDatum::gaussian_shifted(sigma, mean).unwrap();
            let s1 = symmetrize(&d);
            let s2 = symmetrize(&s1);
            prop_assert_eq!(s1.cf(x), s2.cf(x));
            prop_assert_eq!(s1.moments.as_slice(), s2.moments.as_slice());
        }

        #[test]
        fn odd_part_cancels(eps in -0.6f64..0.6, x in -8.0f64..8.0) {
            let p = make_odd_perturbed_gaussian(1.0, eps).unwrap();
            let s = symmetrize(p.datum());
            prop_assert!((s.cf(x).re - (-0.5 * x * x).exp()).abs() < 1e-12);
        }
    }
}
