//! Explicit error bounds for Edgeworth-type expansions of weighted sums
//! `V_n = sum_j c_j X_j / sigma` of iid symmetric variables, checked against
//! the characteristic function of `V_n` on a grid.

use crate::cumulants::{factorial, integer_partitions, y0_threshold, LogCfRemainder, Poly};
use crate::datum::InitialDatum;
use crate::error::{KacError, Result};
use crate::mckean::stream;
use crate::numerics::gauss_hermite;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Which inequality to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// Pointwise bound, fourth order.
    L1Punt4,
    /// Pointwise bound with the sixth-power weight sum.
    L1Fast,
    /// Derivative bound, fourth order.
    L1Der,
    /// Pointwise bound of order `k + delta`.
    L2Punt,
    /// Derivative bound of order `k + delta`.
    L2Der,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] = [
        LemmaId::L1Punt4,
        LemmaId::L1Fast,
        LemmaId::L1Der,
        LemmaId::L2Punt,
        LemmaId::L2Der,
    ];

    fn is_derivative(self) -> bool {
        matches!(self, LemmaId::L1Der | LemmaId::L2Der)
    }

    fn is_fourth_order(self) -> bool {
        matches!(self, LemmaId::L1Punt4 | LemmaId::L1Fast | LemmaId::L1Der)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaId::L1Punt4 => "L1-punt4",
            LemmaId::L1Fast => "L1-fast",
            LemmaId::L1Der => "L1-der",
            LemmaId::L2Punt => "L2-punt",
            LemmaId::L2Der => "L2-der",
        };
        f.write_str(s)
    }
}

impl FromStr for LemmaId {
    type Err = KacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "l1-punt4" => Ok(LemmaId::L1Punt4),
            "l1fast" | "l1-fast" => Ok(LemmaId::L1Fast),
            "l1der" | "l1-der" => Ok(LemmaId::L1Der),
            "l2" | "l2-punt" => Ok(LemmaId::L2Punt),
            "l2der" | "l2-der" => Ok(LemmaId::L2Der),
            other => Err(KacError::Domain(format!(
                "unknown lemma '{other}' (expected l1, l1fast, l1der, l2 or l2der)"
            ))),
        }
    }
}

/// `sum_j c_j a_j |x|^{p_j}`: a polynomial in `|xi|` with real exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum(pub Vec<(f64, f64)>);

impl PowerSum {
    pub fn eval(&self, xi: f64) -> f64 {
        let a = xi.abs();
        self.0.iter().map(|(c, p)| c * a.powf(*p)).sum()
    }

    fn push(&mut self, c: f64, p: f64) {
        if c == 0.0 {
            return;
        }
        match self.0.iter_mut().find(|(_, q)| (*q - p).abs() < 1e-12) {
            Some(t) => t.0 += c,
            None => self.0.push((c, p)),
        }
    }

    fn sorted(mut self) -> Self {
        self.0.sort_by(|a, b| a.1.total_cmp(&b.1));
        self
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() || weights.iter().any(|c| !c.is_finite()) {
        return Err(KacError::Domain("weights must be a non-empty finite array".into()));
    }
    let s2: f64 = weights.iter().map(|c| c * c).sum();
    if (s2 - 1.0).abs() > 1e-9 {
        return Err(KacError::Domain(format!("weights must satisfy sum c^2 = 1 (got {s2})")));
    }
    Ok(())
}

fn check_symmetric(base: &InitialDatum) -> Result<()> {
    if !base.symmetric {
        return Err(KacError::Domain(format!(
            "{} is not symmetric; the bounds assume a symmetric law",
            base.name
        )));
    }
    Ok(())
}

/// Characteristic function of `V_n`: `prod_j psi(c_j xi / sigma)`.
pub fn psi_n(base: &InitialDatum, weights: &[f64], xi: f64) -> Result<f64> {
    check_symmetric(base)?;
    check_weights(weights)?;
    let s = base.sigma2().sqrt();
    Ok(weights.iter().map(|c| base.cf(c * xi / s).re).product())
}

/// Derivative of [`psi_n`] by the product rule.
pub fn psi_n_derivative(base: &InitialDatum, weights: &[f64], xi: f64) -> Result<f64> {
    check_symmetric(base)?;
    check_weights(weights)?;
    let s = base.sigma2().sqrt();
    let vals: Vec<f64> = weights.iter().map(|c| base.cf(c * xi / s).re).collect();
    let mut acc = 0.0;
    for (j, c) in weights.iter().enumerate() {
        let others: f64 = vals
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, v)| v)
            .product();
        acc += c / s * base.cf_derivative(c * xi / s).re * others;
    }
    Ok(acc)
}

/// Threshold `A = sigma y0 (sum c^4)^{-1/(k + delta)}`.
pub fn window_a(weights: &[f64], base: &InitialDatum, k: usize, delta: f64) -> Result<f64> {
    check_weights(weights)?;
    let s2 = base.sigma2();
    let y0 = y0_threshold(s2, base.moments.get(4))?;
    let s4: f64 = weights.iter().map(|c| c.powi(4)).sum();
    Ok(s2.sqrt() * y0 * s4.powf(-1.0 / (k as f64 + delta)))
}

/// Fourth-order constants.
#[derive(Debug, Clone)]
pub struct Lemma1Constants {
    pub c4_double: f64,
    pub c4_triple: f64,
    /// `max(C4**, 4 C4***)`.
    pub c4_star: f64,
    pub m0: f64,
    pub m1: f64,
    pub y0: f64,
    pub sigma: f64,
    pub kappa4: f64,
}

/// `max_{|x| <= c} |F(x)/x^2|` with `F(x) = e^x - 1 - x`; attained at `x = c`.
fn max_f_over_x2(c: f64) -> f64 {
    if c < 1e-4 {
        0.5 + c / 6.0 + c * c / 24.0
    } else {
        (c.exp_m1() - c) / (c * c)
    }
}

/// `(e^c - 1)/c`, continuous at 0.
fn expm1_ratio(c: f64) -> f64 {
    if c == 0.0 {
        1.0
    } else {
        c.exp_m1() / c
    }
}

pub fn lemma1_constants(base: &InitialDatum) -> Result<Lemma1Constants> {
    check_symmetric(base)?;
    let s2 = base.sigma2();
    if !(s2 > 0.0) {
        return Err(KacError::Domain("degenerate law: sigma = 0".into()));
    }
    let rem = base.log_cf_remainder()?;
    let y0 = rem.y0();
    let m0 = rem.sup_epsilon(4);
    let m1 = rem.sup_rho(4);
    let k4 = base.cumulants.get(4);
    let s4 = s2 * s2;
    let y4 = y0.powi(4);
    let c0 = m0 * y4;
    let cu = k4.abs() * y4 / 24.0;
    let max_f = max_f_over_x2(cu);
    let e1 = c0.exp_m1() / (s4 * y4);
    let c4_double = cu.exp() * e1 + max_f;
    let c4_triple = e1 * (1.0 + k4.abs() / (24.0 * s4))
        + max_f * c0.exp()
        + c0.exp() * cu.exp() * 4.0 / s4
        + c0.exp() * k4 * k4 / (144.0 * s4 * s4) * expm1_ratio(cu);
    Ok(Lemma1Constants {
        c4_double,
        c4_triple,
        c4_star: c4_double.max(4.0 * c4_triple),
        m0,
        m1,
        y0,
        sigma: s2.sqrt(),
        kappa4: k4,
    })
}

pub fn compute_c4_star(base: &InitialDatum) -> Result<f64> {
    Ok(lemma1_constants(base)?.c4_star)
}

/// `p_{0,k}(xi) = 1 + (1 + xi^2)[2 xi^2 + 2 xi^{2k-6} + 2^chi xi^{k-2} + 2^chi xi^{chi k - k - 2}]`.
pub fn p0k(k: usize) -> PowerSum {
    let chi = k / 2;
    let two_chi = 2f64.powi(chi as i32);
    let inner = [
        (2.0, 2.0),
        (2.0, (2 * k - 6) as f64),
        (two_chi, (k - 2) as f64),
        (two_chi, (chi * k - k - 2) as f64),
    ];
    let mut out = PowerSum::default();
    out.push(1.0, 0.0);
    for (c, p) in inner {
        out.push(c, p);
        out.push(c, p + 2.0);
    }
    out.sorted()
}

/// `9 (1 + |xi|^{2s^2 - s})` for `k = 2s`.
pub fn p0k_majorant(k: usize, xi: f64) -> f64 {
    let s = (k / 2) as i32;
    9.0 * (1.0 + xi.abs().powi(2 * s * s - s))
}

/// Constants of the order-`(k + delta)` bounds.
#[derive(Debug, Clone)]
pub struct Lemma2Constants {
    pub k: usize,
    pub delta: f64,
    pub c_star: f64,
    /// `e^B chi^{chi^2} W^{chi-1}`.
    pub c_series: f64,
    /// `(e^{M0 y0^k} - 1)/(M0 y0^k) * 2 mbar_{k+delta} / (k! sigma^{k+delta})`.
    pub c_remainder: f64,
    pub b_chi: f64,
    pub w_chi: f64,
    pub p0: PowerSum,
    /// Derivative polynomial assembled term by term; depends on the law.
    pub p1: PowerSum,
    pub a_k: f64,
    pub m0: f64,
    pub m1: f64,
    pub y0: f64,
    pub sigma: f64,
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.0.is_empty() || b.0.is_empty() {
        return Poly(Vec::new());
    }
    let mut out = vec![0.0; a.0.len() + b.0.len() - 1];
    for (i, x) in a.0.iter().enumerate() {
        for (j, y) in b.0.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Poly(out)
}

fn poly_add(a: &mut Poly, b: &Poly) {
    if a.0.len() < b.0.len() {
        a.0.resize(b.0.len(), 0.0);
    }
    for (x, y) in a.0.iter_mut().zip(&b.0) {
        *x += y;
    }
}

pub fn lemma2_constants(base: &InitialDatum, k: usize, delta: f64) -> Result<Lemma2Constants> {
    check_symmetric(base)?;
    if k < 4 || k % 2 == 1 || 2 * k > crate::cumulants::MAX_ORDER {
        return Err(KacError::Domain(format!("k = {k} must be even, >= 4 and <= 10")));
    }
    if !(0.0..=2.0).contains(&delta) {
        return Err(KacError::Domain(format!("delta = {delta} must lie in [0, 2]")));
    }
    let mbar = base.abs_moment(k as f64 + delta);
    if !mbar.is_finite() {
        return Err(KacError::Domain(format!(
            "{} has no absolute moment of order {}",
            base.name,
            k as f64 + delta
        )));
    }
    let s2 = base.sigma2();
    let sigma = s2.sqrt();
    let rem = base.log_cf_remainder()?;
    let y0 = rem.y0();
    let chi = k / 2;
    let kap = |r: usize| base.cumulants.get(r).abs();

    let b_chi: f64 = (2..=chi).map(|s| kap(2 * s) * y0.powi(2 * s as i32)).sum();
    let w_chi = (2..=chi)
        .map(|s| (kap(2 * s) / s2.powi(s as i32)).max(1.0))
        .product::<f64>()
        .powi(chi as i32);
    let c_series =
        b_chi.exp() * (chi as f64).powi((chi * chi) as i32) * w_chi.powi(chi as i32 - 1);
    let m0 = rem.sup_epsilon(k);
    let m1 = rem.sup_rho(k);
    let c0 = m0 * y0.powi(k as i32);
    let c_remainder = expm1_ratio(c0) * 2.0 * mbar / (factorial(k) * sigma.powf(k as f64 + delta));
    let c_star = c_series.max(c_remainder);
    let p0 = p0k(k);

    // Derivative bound, divided through by C* |xi|^{k-1+delta}:
    // |xi| |psi_n - eta| contributes xi^2 p0; the other three pieces follow.
    let kf = b_chi.exp()
        * (1..chi)
            .map(|r| kap(2 * r + 2) * y0.powi(2 * r as i32 + 1) / (factorial(2 * r + 1) * sigma))
            .sum::<f64>();
    let k3 = b_chi.exp() * c0.exp() * 4.0 * k as f64 * mbar
        / (factorial(k - 1) * sigma.powf(k as f64 + delta));
    let mut t4 = Poly(Vec::new());
    for l in 1..=chi {
        let mut q = Poly(vec![0.0; 2 * chi]);
        for r in chi - l..chi {
            q.0[2 * r + 1] = kap(2 * r + 2) / s2.powi(r as i32 + 1);
        }
        let s_m = |m: usize| {
            let mut p = Poly(vec![0.0; 2 * chi + 1]);
            for r in m..chi {
                p.0[2 * r + 2] = kap(2 * r + 2) / s2.powi(r as i32 + 1) / factorial(m);
            }
            p
        };
        let mut inner = Poly(Vec::new());
        for ks in integer_partitions(l) {
            let mut prod = Poly(vec![1.0]);
            for (idx, &km) in ks.iter().enumerate() {
                let sm = s_m(idx + 1);
                for _ in 0..km {
                    prod = poly_mul(&prod, &sm);
                }
                prod.0.iter_mut().for_each(|c| *c /= factorial(km));
            }
            poly_add(&mut inner, &prod);
        }
        let mut term = poly_mul(&inner, &q);
        let scale = b_chi.exp() / factorial(chi - l);
        term.0.iter_mut().for_each(|c| *c *= scale);
        poly_add(&mut t4, &term);
    }
    let shift = k as f64 - 1.0 + delta;
    let mut p1 = PowerSum::default();
    for (c, p) in &p0.0 {
        p1.push(*c, p + 2.0);
    }
    p1.push(kf * c_remainder / c_star, 1.0);
    p1.push(k3 / c_star, 0.0);
    for (i, c) in t4.0.iter().enumerate() {
        p1.push(c / c_star, i as f64 - shift);
    }
    let p1 = p1.sorted();

    // a_k: Gauss-Hermite against the weight e^{-xi^2}.
    let (nodes, weights) = gauss_hermite(120);
    let kk = k as f64;
    let gh = |f: &dyn Fn(f64) -> f64| -> f64 { nodes.iter().zip(&weights).map(|(x, w)| w * f(*x)).sum() };
    let a0 = gh(&|x: f64| (x.abs().powf(kk) * (1.0 + x * x) * p0.eval(x)).powi(2));
    let a1 = gh(&|x: f64| (x.abs().powf(kk - 1.0) * (1.0 + x * x) * p1.eval(x)).powi(2));
    let a_k = a0.sqrt().max(a1.sqrt());

    Ok(Lemma2Constants {
        k,
        delta,
        c_star,
        c_series,
        c_remainder,
        b_chi,
        w_chi,
        p0,
        p1,
        a_k,
        m0,
        m1,
        y0,
        sigma,
    })
}

/// Constants recorded with a certificate.
#[derive(Debug, Clone)]
pub enum LemmaConstants {
    Fourth(Lemma1Constants),
    General(Lemma2Constants),
}

impl LemmaConstants {
    pub fn c_star(&self) -> f64 {
        match self {
            LemmaConstants::Fourth(c) => c.c4_star,
            LemmaConstants::General(c) => c.c_star,
        }
    }

    pub fn y0(&self) -> f64 {
        match self {
            LemmaConstants::Fourth(c) => c.y0,
            LemmaConstants::General(c) => c.y0,
        }
    }
}

/// Outcome of checking one inequality for one weight array.
#[derive(Debug, Clone)]
pub struct BoundCertificate {
    pub lemma: LemmaId,
    pub weights: Vec<f64>,
    pub base: InitialDatum,
    pub k: usize,
    pub delta: f64,
    pub window: f64,
    /// `max (LHS - RHS)` over the grid; `<= 0` means the bound holds.
    pub max_violation: f64,
    pub argmax_xi: f64,
    pub grid_points: usize,
    pub constants: LemmaConstants,
}

impl BoundCertificate {
    pub fn holds(&self) -> bool {
        self.max_violation <= 0.0
    }
}

/// Law-dependent pieces shared by every weight array.
pub struct LemmaSetup {
    pub lemma: LemmaId,
    pub base: InitialDatum,
    pub k: usize,
    pub delta: f64,
    pub constants: LemmaConstants,
    rem: LogCfRemainder,
    sigma: f64,
}

impl LemmaSetup {
    /// The fourth-order variants ignore `k` and `delta` (they use 4 and 0).
    pub fn new(lemma: LemmaId, base: &InitialDatum, k: usize, delta: f64) -> Result<Self> {
        check_symmetric(base)?;
        let (k, delta, constants) = if lemma.is_fourth_order() {
            (4, 0.0, LemmaConstants::Fourth(lemma1_constants(base)?))
        } else {
            (k, delta, LemmaConstants::General(lemma2_constants(base, k, delta)?))
        };
        Ok(Self {
            lemma,
            base: base.clone(),
            k,
            delta,
            constants,
            rem: base.log_cf_remainder()?,
            sigma: base.sigma2().sqrt(),
        })
    }

    /// `psi_n - eta_{k,n}` written as `e^{-xi^2/2} [(f - p) + f (e^R - 1)]`,
    /// so both pieces keep full relative accuracy as `xi -> 0`.
    pub fn difference(&self, weights: &[f64], xi: f64) -> f64 {
        let chi = self.k / 2;
        let s2 = self.sigma * self.sigma;
        // g(z) = sum_m g_m z^m, g_m = (-1)^{m+1} lambda~_{m+1} xi^{2m+2}/(2m+2)!
        let g: Vec<f64> = (1..chi)
            .map(|m| {
                let r = m + 1;
                let pc: f64 = weights.iter().map(|c| c.powi(2 * r as i32)).sum();
                let lam = self.base.cumulants.get(2 * r) / s2.powi(r as i32) * pc;
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * lam * xi.powi(2 * r as i32) / factorial(2 * r)
            })
            .collect();
        // Taylor coefficients of exp(g(z)) at 0: n e_n = sum_j j g_j e_{n-j}.
        let mut e = vec![1.0];
        let mut tail = 0.0;
        for n in 1..600 {
            let mut acc = 0.0;
            for j in 1..=g.len().min(n) {
                acc += j as f64 * g[j - 1] * e[n - j];
            }
            e.push(acc / n as f64);
            if n >= chi {
                tail += e[n];
                let quiet = (n.saturating_sub(chi.max(2))..=n).all(|i| e[i].abs() <= 1e-18 * tail.abs());
                if n > 4 * chi && quiet {
                    break;
                }
            }
        }
        let f1 = g.iter().sum::<f64>().exp();
        let r: f64 = weights
            .iter()
            .map(|c| self.rem.tail(self.k, c * xi / self.sigma))
            .sum();
        (-0.5 * xi * xi).exp() * (tail + f1 * r.exp_m1())
    }

    fn difference_derivative(&self, weights: &[f64], xi: f64, h: f64) -> f64 {
        let d = |x: f64| self.difference(weights, x);
        (d(xi - 2.0 * h) - 8.0 * d(xi - h) + 8.0 * d(xi + h) - d(xi + 2.0 * h)) / (12.0 * h)
    }

    fn rhs(&self, weights: &[f64], xi: f64) -> f64 {
        let a = xi.abs();
        let g = (-0.5 * xi * xi).exp();
        let s4: f64 = weights.iter().map(|c| c.powi(4)).sum();
        let s6: f64 = weights.iter().map(|c| c.powi(6)).sum();
        let eps_sum = || -> f64 {
            weights
                .iter()
                .map(|c| c.powi(4) * self.rem.eps_unchecked(4, c * xi / self.sigma).abs())
                .sum()
        };
        let c = self.constants.c_star();
        match (&self.constants, self.lemma) {
            (_, LemmaId::L1Punt4) => c * a.powi(4) * g * (a.powi(4) * s4 + eps_sum()),
            (_, LemmaId::L1Fast) => c * a.powi(4) * (1.0 + a.powi(4)) * g * (s6 + eps_sum()),
            (_, LemmaId::L1Der) => {
                let rho_sum: f64 = weights
                    .iter()
                    .map(|cj| {
                        let x = (cj * xi / self.sigma).clamp(-self.rem.y0(), self.rem.y0());
                        cj.powi(4) * self.rem.rho(4, x).map(f64::abs).unwrap_or(f64::NAN)
                    })
                    .sum();
                c * a.powi(3) * (1.0 + a.powi(6)) * g * (s6 + eps_sum() + rho_sum)
            }
            (LemmaConstants::General(lc), LemmaId::L2Punt) => {
                let q = self.k as f64 + self.delta;
                let sc: f64 = weights.iter().map(|c| c.abs().powf(q)).sum();
                c * lc.p0.eval(xi) * a.powf(q) * g * sc
            }
            (LemmaConstants::General(lc), LemmaId::L2Der) => {
                let q = self.k as f64 + self.delta;
                let sc: f64 = weights.iter().map(|c| c.abs().powf(q)).sum();
                c * lc.p1.eval(xi) * a.powf(q - 1.0) * g * sc
            }
            _ => unreachable!("constants match the lemma family"),
        }
    }

    /// Largest `LHS - RHS` over `grid` equispaced points of `[-A, A]`.
    /// At `xi = 0` both sides vanish identically and the point is skipped.
    pub fn verify(&self, weights: &[f64], grid: usize) -> Result<BoundCertificate> {
        check_weights(weights)?;
        if grid < 2000 {
            return Err(KacError::Domain(format!("grid of {grid} points is below 2000")));
        }
        let window = window_a(weights, &self.base, self.k, self.delta)?;
        if !(window > 0.0 && window.is_finite()) {
            return Err(KacError::Domain("empty window".into()));
        }
        let h = 1e-4 * window;
        let mut worst = (f64::NEG_INFINITY, 0.0);
        for i in 0..grid {
            let xi = -window + 2.0 * window * i as f64 / (grid - 1) as f64;
            if xi.abs() < 1e-12 * window {
                continue;
            }
            let lhs = if self.lemma.is_derivative() {
                self.difference_derivative(weights, xi, h).abs()
            } else {
                self.difference(weights, xi).abs()
            };
            let v = lhs - self.rhs(weights, xi);
            if v > worst.0 || v.is_nan() {
                worst = (v, xi);
            }
        }
        if worst.0.is_nan() {
            return Err(KacError::Domain(format!("bound evaluation failed at xi = {}", worst.1)));
        }
        Ok(BoundCertificate {
            lemma: self.lemma,
            weights: weights.to_vec(),
            base: self.base.clone(),
            k: self.k,
            delta: self.delta,
            window,
            max_violation: worst.0,
            argmax_xi: worst.1,
            grid_points: grid,
            constants: self.constants.clone(),
        })
    }
}

/// One-shot check; prefer [`LemmaSetup`] when reusing a law.
pub fn verify_lemma(
    lemma: LemmaId,
    base: &InitialDatum,
    weights: &[f64],
    k: usize,
    delta: f64,
    grid: usize,
) -> Result<BoundCertificate> {
    LemmaSetup::new(lemma, base, k, delta)?.verify(weights, grid)
}

/// Uniform point on the unit sphere of `R^n`.
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `trials` random arrays with `n` uniform on `1..=n_max`, checked in parallel.
/// Trial `i` draws from its own stream, so results do not depend on threads.
pub fn lemma_suite(
    setup: &LemmaSetup,
    trials: usize,
    n_max: usize,
    seed: u64,
    grid: usize,
) -> Result<Vec<BoundCertificate>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, SUITE_BATCH, i as u64);
            let n = rng.gen_range(1..=n_max.max(1));
            let w = random_weights(n, &mut rng);
            setup.verify(&w, grid)
        })
        .collect()
}

const SUITE_BATCH: u64 = 3;
