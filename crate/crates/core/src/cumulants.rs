//! Moment/cumulant conversion, the Edgeworth polynomials `P~_r`, the window
//! threshold `y0` and the log-cf remainders `eps_k`, `rho_k`.

use crate::error::{KacError, Result};

/// Highest moment/cumulant order handled anywhere.
pub const MAX_ORDER: usize = 20;

/// Raw moments `m_0 = 1, m_1, ..., m_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    m: Vec<f64>,
}

/// Cumulants `kappa_1, ..., kappa_K`; index 0 is unused and holds 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector {
    k: Vec<f64>,
}

impl MomentVector {
    /// Builds from `[m_0, m_1, ..., m_K]`; `m_0` must be 1.
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() || (m[0] - 1.0).abs() > 1e-12 {
            return Err(KacError::InconsistentMoments("m_0 must equal 1".into()));
        }
        if m.len() > MAX_ORDER + 1 {
            return Err(KacError::UnsupportedOrder {
                order: m.len() - 1,
                max: MAX_ORDER,
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(KacError::InconsistentMoments("non-finite moment".into()));
        }
        if m.len() > 2 && m[2] - m[1] * m[1] < 0.0 {
            return Err(KacError::InconsistentMoments(format!(
                "negative variance {}",
                m[2] - m[1] * m[1]
            )));
        }
        for (r, v) in m.iter().enumerate() {
            if r % 2 == 0 && *v < 0.0 {
                return Err(KacError::InconsistentMoments(format!("m_{r} = {v} < 0")));
            }
        }
        Ok(Self { m })
    }

    /// Moments of a symmetric law from its even moments `m_2, m_4, ...`.
    pub fn symmetric(even: &[f64]) -> Result<Self> {
        let mut m = vec![1.0];
        for v in even {
            m.push(0.0);
            m.push(*v);
        }
        Self::new(m)
    }

    pub fn order(&self) -> usize {
        self.m.len() - 1
    }

    pub fn get(&self, r: usize) -> f64 {
        self.m[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.m
    }

    pub fn variance(&self) -> f64 {
        self.m[2] - self.m[1] * self.m[1]
    }
}

impl CumulantVector {
    pub fn from_values(k: Vec<f64>) -> Self {
        Self { k }
    }

    pub fn order(&self) -> usize {
        self.k.len() - 1
    }

    /// `kappa_r`, or 0 beyond the stored order.
    pub fn get(&self, r: usize) -> f64 {
        self.k.get(r).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }
}

/// All multiplicity vectors `(k_1, ..., k_r)` with `sum_j j k_j = r`.
pub fn integer_partitions(r: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        if part == 0 {
            return;
        }
        let max = rem / part;
        for k in (0..=max).rev() {
            cur[part - 1] = k;
            rec(rem - k * part, part - 1, cur, out);
        }
        cur[part - 1] = 0;
    }
    let mut out = Vec::new();
    if r == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0; r];
    rec(r, r, &mut cur, &mut out);
    out
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

/// Number of set partitions of an `r`-set with block multiplicities `ks`.
fn set_partition_count(r: usize, ks: &[usize]) -> f64 {
    let mut denom = 1.0;
    for (j, &k) in ks.iter().enumerate() {
        denom *= factorial(j + 1).powi(k as i32) * factorial(k);
    }
    factorial(r) / denom
}

fn check_order(order: usize, available: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(KacError::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    if order > available {
        return Err(KacError::UnsupportedOrder {
            order,
            max: available,
        });
    }
    Ok(())
}

/// Cumulants up to `order` by the set-partition formula.
pub fn moments_to_cumulants(m: &MomentVector, order: usize) -> Result<CumulantVector> {
    check_order(order, m.order())?;
    let mut k = vec![0.0; order + 1];
    for (r, slot) in k.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for ks in integer_partitions(r) {
            let blocks: usize = ks.iter().sum();
            let sign = if blocks % 2 == 1 { 1.0 } else { -1.0 };
            let mut prod = set_partition_count(r, &ks) * sign * factorial(blocks - 1);
            for (j, &kj) in ks.iter().enumerate() {
                if kj > 0 {
                    prod *= m.get(j + 1).powi(kj as i32);
                }
            }
            acc += prod;
        }
        *slot = acc;
    }
    Ok(CumulantVector { k })
}

/// Inverse map: raw moments up to `order` from cumulants.
pub fn cumulants_to_moments(c: &CumulantVector, order: usize) -> Result<MomentVector> {
    check_order(order, c.order())?;
    let mut m = vec![1.0; order + 1];
    for (r, slot) in m.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for ks in integer_partitions(r) {
            let mut prod = set_partition_count(r, &ks);
            for (j, &kj) in ks.iter().enumerate() {
                if kj > 0 {
                    prod *= c.get(j + 1).powi(kj as i32);
                }
            }
            acc += prod;
        }
        *slot = acc;
    }
    Ok(MomentVector { m })
}

/// `y0` with `Re psi >= 1/2` on `[-y0, y0]`, from the variance and fourth moment.
pub fn y0_threshold(sigma2: f64, m4: f64) -> Result<f64> {
    if !(sigma2 > 0.0) || !(m4 > 0.0) {
        return Err(KacError::Domain(format!(
            "y0 needs sigma^2 > 0 and m_4 > 0 (got {sigma2}, {m4})"
        )));
    }
    let inner = (36.0 * sigma2 * sigma2 + 12.0 * m4).sqrt() - 6.0 * sigma2;
    Ok((inner / m4).sqrt())
}

/// A polynomial in `xi`, coefficient `c[p]` multiplying `xi^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, c)| p as f64 * c)
                .collect(),
        )
    }
}

/// Inputs of the Edgeworth-type approximant of a weighted sum of iid copies.
#[derive(Debug, Clone)]
pub struct EdgeworthSpec {
    pub chi: usize,
    pub weights: Vec<f64>,
    pub cumulants: CumulantVector,
    pub sigma2: f64,
}

impl EdgeworthSpec {
    pub fn new(
        chi: usize,
        weights: Vec<f64>,
        cumulants: CumulantVector,
        sigma2: f64,
    ) -> Result<Self> {
        if chi < 1 {
            return Err(KacError::Domain("chi must be >= 1".into()));
        }
        if 2 * chi > cumulants.order() {
            return Err(KacError::UnsupportedOrder {
                order: 2 * chi,
                max: cumulants.order(),
            });
        }
        let s2: f64 = weights.iter().map(|c| c * c).sum();
        if (s2 - 1.0).abs() > 1e-12 {
            return Err(KacError::Domain(format!(
                "weights must satisfy sum c^2 = 1 (got {s2})"
            )));
        }
        if !(sigma2 > 0.0) {
            return Err(KacError::Domain("sigma^2 must be positive".into()));
        }
        Ok(Self {
            chi,
            weights,
            cumulants,
            sigma2,
        })
    }

    /// `lambda~_r = kappa_{2r} / sigma^{2r} * sum_j c_j^{2r}`.
    pub fn lambda_tilde(&self, r: usize) -> f64 {
        let pc: f64 = self.weights.iter().map(|c| c.powi(2 * r as i32)).sum();
        self.cumulants.get(2 * r) / self.sigma2.powi(r as i32) * pc
    }
}

/// Polynomials `P~_1, ..., P~_{chi-1}`.
pub fn ptilde_polynomials(spec: &EdgeworthSpec) -> Vec<Poly> {
    (1..spec.chi)
        .map(|r| {
            let mut coeffs = vec![0.0; 4 * r + 1];
            for ks in integer_partitions(r) {
                let s: usize = ks.iter().sum();
                let mut prod = if (r + s) % 2 == 0 { 1.0 } else { -1.0 };
                for (idx, &km) in ks.iter().enumerate() {
                    let m = idx + 1;
                    if km > 0 {
                        let base = spec.lambda_tilde(m + 1) / factorial(2 * m + 2);
                        prod *= base.powi(km as i32) / factorial(km);
                    }
                }
                coeffs[2 * (r + s)] += prod;
            }
            Poly(coeffs)
        })
        .collect()
}

/// `eta(xi) = exp(-xi^2/2) (1 + sum_r P~_r(xi))`.
pub fn eta_approximant(spec: &EdgeworthSpec, xi: f64) -> f64 {
    let ps = ptilde_polynomials(spec);
    eta_with(&ps, xi)
}

pub(crate) fn eta_with(ps: &[Poly], xi: f64) -> f64 {
    let s: f64 = ps.iter().map(|p| p.eval(xi)).sum();
    (-0.5 * xi * xi).exp() * (1.0 + s)
}

/// Intervals of the grid used for the suprema `M_0`, `M_1`.
const SUP_GRID: usize = 10_000;

/// Remainder of `log psi` after its even cumulant expansion, for a symmetric law.
///
/// `eps_k(x) = [log psi(x) - sum_{r<=chi} (-1)^r kappa_{2r} x^{2r}/(2r)!] / x^k`
/// with `chi = floor(k/2)`. Small arguments use the cumulant series directly to
/// avoid cancellation.
pub struct LogCfRemainder {
    kappa: Vec<f64>,
    sigma2: f64,
    y0: f64,
    series_cut: f64,
    /// Every cumulant above the second vanishes: `log psi` is exactly quadratic.
    quadratic: bool,
    log_psi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for LogCfRemainder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogCfRemainder")
            .field("sigma2", &self.sigma2)
            .field("y0", &self.y0)
            .finish()
    }
}

impl LogCfRemainder {
    pub fn new(
        cumulants: &CumulantVector,
        m4: f64,
        log_psi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        let sigma2 = cumulants.get(2);
        let y0 = y0_threshold(sigma2, m4)?;
        let kappa: Vec<f64> = (0..=MAX_ORDER).map(|r| cumulants.get(r)).collect();
        // Estimate the convergence radius from the tail of the series.
        let mut radius = f64::INFINITY;
        for r in 5..=MAX_ORDER / 2 {
            let a = kappa[2 * r].abs() / factorial(2 * r);
            if a > 0.0 {
                radius = radius.min(a.powf(-1.0 / (2 * r) as f64));
            }
        }
        let series_cut = (0.2 / sigma2.sqrt()).min(0.3 * radius);
        let quadratic = kappa[3..].iter().all(|c| *c == 0.0);
        Ok(Self {
            kappa,
            sigma2,
            y0,
            series_cut,
            quadratic,
            log_psi,
        })
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn kappa(&self, r: usize) -> f64 {
        self.kappa.get(r).copied().unwrap_or(0.0)
    }

    fn check(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x.abs() > self.y0 * (1.0 + 1e-12) {
            return Err(KacError::OutOfWindow { xi: x, y0: self.y0 });
        }
        Ok(())
    }

    /// `x^k eps_k(x)` without the window check.
    pub(crate) fn tail(&self, k: usize, x: f64) -> f64 {
        if self.quadratic {
            return 0.0;
        }
        let chi = k / 2;
        if x.abs() <= self.series_cut {
            let mut acc = 0.0;
            for r in (chi + 1..=MAX_ORDER / 2).rev() {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * self.kappa[2 * r] * x.powi(2 * r as i32) / factorial(2 * r);
            }
            acc
        } else {
            let mut poly = 0.0;
            for r in 1..=chi {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                poly += sign * self.kappa[2 * r] * x.powi(2 * r as i32) / factorial(2 * r);
            }
            (self.log_psi)(x) - poly
        }
    }

    pub(crate) fn eps_unchecked(&self, k: usize, x: f64) -> f64 {
        if x == 0.0 || self.quadratic {
            return 0.0;
        }
        let chi = k / 2;
        if x.abs() <= self.series_cut {
            // Divide termwise so tiny arguments do not underflow.
            let mut acc = 0.0;
            for r in (chi + 1..=MAX_ORDER / 2).rev() {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * self.kappa[2 * r] * x.powi((2 * r - k) as i32) / factorial(2 * r);
            }
            return acc;
        }
        self.tail(k, x) / x.abs().powi(k as i32) * if k % 2 == 1 { x.signum() } else { 1.0 }
    }

    /// `eps_k(x)` on `|x| <= y0`.
    pub fn epsilon(&self, k: usize, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.eps_unchecked(k, x))
    }

    /// `rho_k(x) = x eps_k'(x)`; central differences with step `1e-5 y0`,
    /// one-sided (pointing inwards) within a step of the window edge.
    pub fn rho(&self, k: usize, x: f64) -> Result<f64> {
        self.check(x)?;
        let h = 1e-5 * self.y0;
        let d = if x.abs() + 2.0 * h <= self.y0 {
            (self.eps_unchecked(k, x - 2.0 * h) - 8.0 * self.eps_unchecked(k, x - h)
                + 8.0 * self.eps_unchecked(k, x + h)
                - self.eps_unchecked(k, x + 2.0 * h))
                / (12.0 * h)
        } else {
            let s = -x.signum();
            let f0 = self.eps_unchecked(k, x);
            let f1 = self.eps_unchecked(k, x + s * h);
            let f2 = self.eps_unchecked(k, x + 2.0 * s * h);
            s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
        };
        Ok(x * d)
    }

    /// Grid supremum of `|eps_k|` over the window.
    pub fn sup_epsilon(&self, k: usize) -> f64 {
        (0..=SUP_GRID)
            .map(|i| {
                let x = -self.y0 + 2.0 * self.y0 * i as f64 / SUP_GRID as f64;
                self.eps_unchecked(k, x).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Grid supremum of `|rho_k|` over the window.
    pub fn sup_rho(&self, k: usize) -> f64 {
        (0..=SUP_GRID)
            .map(|i| {
                let x = -self.y0 + 2.0 * self.y0 * i as f64 / SUP_GRID as f64;
                self.rho(k, x).map(f64::abs).unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent oracle: the classical recursion
    // kappa_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k m_{n-k}.
    fn recursion_cumulants(m: &[f64]) -> Vec<f64> {
        let n = m.len() - 1;
        let mut k = vec![0.0; n + 1];
        for r in 1..=n {
            let mut acc = m[r];
            for j in 1..r {
                let mut c = 1.0;
                for i in 0..(j - 1) {
                    c = c * (r - 1 - i) as f64 / (i + 1) as f64;
                }
                acc -= c * k[j] * m[r - j];
            }
            k[r] = acc;
        }
        k
    }

    fn uniform_moments(order: usize) -> MomentVector {
        let a = 3f64.sqrt();
        let m = (0..=order)
            .map(|r| {
                if r % 2 == 1 {
                    0.0
                } else {
                    a.powi(r as i32) / (r + 1) as f64
                }
            })
            .collect();
        MomentVector::new(m).unwrap()
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..=10).map(|r| integer_partitions(r).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert_eq!(integer_partitions(20).len(), 627);
    }

    #[test]
    fn gaussian_and_uniform_cumulants() {
        let g = MomentVector::symmetric(&[1.0, 3.0, 15.0, 105.0]).unwrap();
        let k = moments_to_cumulants(&g, 8).unwrap();
        assert!((k.get(2) - 1.0).abs() < 1e-14);
        for r in 3..=8 {
            assert!(k.get(r).abs() < 1e-12, "kappa_{r} = {}", k.get(r));
        }
        let u = MomentVector::symmetric(&[1.0, 9.0 / 5.0]).unwrap();
        let k = moments_to_cumulants(&u, 4).unwrap();
        assert!((k.get(4) + 6.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn matches_recursion_oracle_to_order_twenty() {
        let m = uniform_moments(20);
        let k = moments_to_cumulants(&m, 20).unwrap();
        let oracle = recursion_cumulants(m.as_slice());
        for r in 1..=20 {
            let scale = oracle[r].abs().max(1.0);
            assert!((k.get(r) - oracle[r]).abs() < 1e-10 * scale, "r = {r}");
        }
    }

    #[test]
    fn order_and_consistency_errors() {
        let m = uniform_moments(20);
        assert!(matches!(
            moments_to_cumulants(&m, 21),
            Err(KacError::UnsupportedOrder { .. })
        ));
        assert!(matches!(
            MomentVector::new(vec![1.0, 1.0, 0.5]),
            Err(KacError::InconsistentMoments(_))
        ));
    }

    #[test]
    fn y0_examples() {
        assert!((y0_threshold(1.0, 3.0).unwrap() - 0.910_179_721_124_455).abs() < 1e-12);
        let u = y0_threshold(1.0, 1.8).unwrap();
        let expect = ((57.6f64.sqrt() - 6.0) / 1.8).sqrt();
        assert!((u - expect).abs() < 1e-14);
        assert!((u - 0.9397).abs() < 1e-4);
    }

    #[test]
    fn eta_single_uniform_weight() {
        let k = CumulantVector::from_values(vec![0.0, 0.0, 1.0, 0.0, -1.2]);
        let spec = EdgeworthSpec::new(2, vec![1.0], k, 1.0).unwrap();
        let v = eta_approximant(&spec, 1.0);
        assert!((v - 0.95 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn weights_must_be_normalised() {
        let k = CumulantVector::from_values(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(EdgeworthSpec::new(2, vec![0.5, 0.5], k, 1.0).is_err());
    }

    // Oracle for P~: expand exp(g(z)) in z by the recurrence
    // e_n = (1/n) sum_k k g_k e_{n-k}, with polynomial coefficients in xi.
    fn exp_series_oracle(spec: &EdgeworthSpec) -> Vec<Vec<f64>> {
        let chi = spec.chi;
        let deg = 4 * chi + 4;
        // g_r(xi) = (-1)^{r+1} lambda_{r+1} xi^{2r+2} / (2r+2)!
        let mut g = vec![vec![0.0; deg + 1]; chi];
        for (r, gr) in g.iter_mut().enumerate().skip(1) {
            let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
            gr[2 * r + 2] = sign * spec.lambda_tilde(r + 1) / factorial(2 * r + 2);
        }
        let mut e = vec![vec![0.0; deg + 1]; chi];
        e[0][0] = 1.0;
        for n in 1..chi {
            let mut acc = vec![0.0; deg + 1];
            for k in 1..=n {
                for (i, gi) in g[k].iter().enumerate() {
                    if *gi == 0.0 {
                        continue;
                    }
                    for (j, ej) in e[n - k].iter().enumerate() {
                        if i + j <= deg {
                            acc[i + j] += k as f64 * gi * ej;
                        }
                    }
                }
            }
            e[n] = acc.iter().map(|v| v / n as f64).collect();
        }
        e
    }

    #[test]
    fn ptilde_matches_series_oracle() {
        for chi in 2..=5 {
            let mut kv = vec![0.0; 2 * chi + 1];
            kv[2] = 1.3;
            for r in 2..=chi {
                kv[2 * r] = (r as f64 * 0.7).sin() * 3.0;
            }
            let w = vec![0.6, 0.8];
            let spec = EdgeworthSpec::new(chi, w, CumulantVector::from_values(kv), 1.3).unwrap();
            let ps = ptilde_polynomials(&spec);
            let oracle = exp_series_oracle(&spec);
            for r in 1..chi {
                for (p, c) in ps[r - 1].0.iter().enumerate() {
                    let o = oracle[r].get(p).copied().unwrap_or(0.0);
                    assert!((c - o).abs() < 1e-13 * o.abs().max(1.0), "chi {chi} r {r} p {p}");
                }
            }
        }
    }

    fn uniform_remainder() -> LogCfRemainder {
        let m = uniform_moments(20);
        let k = moments_to_cumulants(&m, 20).unwrap();
        let a = 3f64.sqrt();
        LogCfRemainder::new(&k, m.get(4), Box::new(move |x: f64| ((a * x).sin() / (a * x)).ln()))
            .unwrap()
    }

    #[test]
    fn epsilon_uniform_example() {
        let r = uniform_remainder();
        let x: f64 = 0.5;
        let a = 3f64.sqrt();
        let direct = (((a * x).sin() / (a * x)).ln() + x * x / 2.0 + 1.2 * x.powi(4) / 24.0)
            / x.powi(4);
        assert!((r.epsilon(4, x).unwrap() - direct).abs() < 1e-12);
        assert!(r.epsilon(4, 1e-6).unwrap().abs() < 1e-3);
        assert!(r.epsilon(4, 2.0).is_err());
    }

    #[test]
    fn series_and_direct_branches_agree() {
        let r = uniform_remainder();
        let x = r.series_cut;
        for k in [4usize, 5, 6] {
            let s = r.eps_unchecked(k, x * (1.0 - 1e-9));
            let d = r.eps_unchecked(k, x * (1.0 + 1e-9));
            assert!((s - d).abs() < 1e-8 * s.abs().max(1e-6), "k = {k}: {s} vs {d}");
        }
    }

    #[test]
    fn rho_is_finite_up_to_edge() {
        let r = uniform_remainder();
        let y0 = r.y0();
        assert!(r.rho(4, y0).unwrap().is_finite());
        assert!(r.rho(4, -y0).unwrap().is_finite());
        // eps_4 ~ c x^2 near 0 so rho_4 ~ 2 eps_4.
        let x = 0.05;
        let ratio = r.rho(4, x).unwrap() / r.epsilon(4, x).unwrap();
        assert!((ratio - 2.0).abs() < 1e-2);
    }

    fn arb_symmetric_moments() -> impl Strategy<Value = MomentVector> {
        // Mixtures of centred Gaussians and uniforms give valid moment sequences.
        (0.1f64..0.9, 0.3f64..2.0, 0.3f64..2.0).prop_map(|(w, s, a)| {
            let m = (0..=12)
                .map(|r| {
                    if r % 2 == 1 {
                        return 0.0;
                    }
                    let dfact: f64 = (1..r).step_by(2).map(|i| i as f64).product();
                    w * s.powi(r as i32) * dfact + (1.0 - w) * a.powi(r as i32) / (r + 1) as f64
                })
                .collect();
            MomentVector::new(m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip(m in arb_symmetric_moments()) {
            let k = moments_to_cumulants(&m, 12).unwrap();
            let back = cumulants_to_moments(&k, 12).unwrap();
            for r in 0..=12 {
                let a = m.get(r);
                prop_assert!((a - back.get(r)).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn scaling_law(m in arb_symmetric_moments(), c in 0.2f64..3.0) {
            let scaled: Vec<f64> = m.as_slice().iter().enumerate()
                .map(|(r, v)| v * c.powi(r as i32)).collect();
            let ms = MomentVector::new(scaled).unwrap();
            let k = moments_to_cumulants(&m, 12).unwrap();
            let ks = moments_to_cumulants(&ms, 12).unwrap();
            for r in 1..=12 {
                let expect = c.powi(r as i32) * k.get(r);
                prop_assert!((ks.get(r) - expect).abs() <= 1e-9 * expect.abs().max(1.0));
            }
        }

        #[test]
        fn symmetric_laws_have_no_odd_cumulants(m in arb_symmetric_moments()) {
            let k = moments_to_cumulants(&m, 12).unwrap();
            for r in (1..=11).step_by(2) {
                prop_assert!(k.get(r) == 0.0);
            }
        }
    }
}
