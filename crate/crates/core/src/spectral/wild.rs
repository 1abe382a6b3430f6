use super::grid::{CfGrid, GridParams};
use super::theta::ThetaRule;
use crate::datum::InitialDatum;
use crate::error::{KacError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Settings for [`wild_series`].
#[derive(Debug, Clone)]
pub struct WildOptions {
    /// Bound on the discarded tail weight `(1 - e^{-t})^N`.
    pub tol: f64,
    /// Hard cap on the number of terms.
    pub cap: usize,
    /// Assign the discarded weight to the equilibrium, and let the cap bind
    /// instead of failing.
    pub tail_closure: bool,
    pub theta: ThetaRule,
}

impl Default for WildOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            cap: 400,
            tail_closure: false,
            theta: ThetaRule::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct WildReport {
    /// Terms computed (the largest `N(t)` over the requested times).
    pub terms: usize,
    /// Discarded weight at the largest requested time.
    pub tail_weight: f64,
    /// Angular products evaluated.
    pub products: usize,
}

/// Smallest `N` with `(1 - e^{-t})^N < tol`.
pub fn wild_terms_needed(t: f64, tol: f64) -> usize {
    let q = -(-t).exp_m1();
    if q <= 0.0 {
        return 1;
    }
    let n = (tol.ln() / q.ln()).floor() + 1.0;
    if n > usize::MAX as f64 / 2.0 {
        usize::MAX / 2
    } else {
        (n as usize).max(1)
    }
}

/// Truncated Wild sums at each requested time. The terms `q_n` are built once
/// for the largest time and reused.
pub fn wild_series(
    d: &InitialDatum,
    times: &[f64],
    grid: GridParams,
    opts: &WildOptions,
) -> Result<(Vec<CfGrid>, WildReport)> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(KacError::Domain(format!("tail tolerance {} must lie in (0, 1)", opts.tol)));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(KacError::Domain("times must be finite and >= 0".into()));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let needed = wild_terms_needed(t_max, opts.tol);
    if needed > opts.cap && !opts.tail_closure {
        let q = -(-t_max).exp_m1();
        return Err(KacError::Truncation {
            needed,
            cap: opts.cap,
            tol: opts.tol,
            achievable: q.powi(opts.cap as i32),
        });
    }
    let n_terms = needed.min(opts.cap);
    let h = grid.dxi();
    let s2 = d.sigma2();
    let nodes = grid.half_nodes();
    let phi0: Vec<Complex64> = nodes.iter().map(|x| d.cf(*x)).collect();

    // Only even parts enter the products, and every q_n with n >= 2 is real.
    let mut terms: Vec<Vec<f64>> = Vec::with_capacity(n_terms + 1);
    terms.push(Vec::new());
    terms.push(phi0.iter().map(|c| c.re).collect());
    // The panels calibrated on phi_0 serve every product: later terms are
    // smoother.
    let panels = opts.theta.calibrate(&terms[1], h).panels;
    let plan = (n_terms > 1).then(|| opts.theta.plan(nodes.len(), h, &panels));
    let mut products = 0usize;
    for n in 2..=n_terms {
        let plan = plan.as_ref().expect("built when n_terms > 1");
        let mut acc = vec![0.0; nodes.len()];
        for k in 1..=n / 2 {
            let (mult, prod) = if 2 * k == n {
                (1.0, plan.product(&terms[k], None))
            } else {
                (2.0, plan.product(&terms[k], Some(&terms[n - k])))
            };
            products += 1;
            for (a, p) in acc.iter_mut().zip(&prod) {
                *a += mult * p;
            }
        }
        let inv = 1.0 / (n - 1) as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
        terms.push(acc);
    }

    let mut out = Vec::with_capacity(times.len());
    let mut tail_at_max = 0.0;
    for &t in times {
        let e = (-t).exp();
        let q = -(-t).exp_m1();
        let nt = wild_terms_needed(t, opts.tol).min(n_terms);
        let mut vals: Vec<Complex64> = phi0.iter().map(|c| c * e).collect();
        let mut w = e;
        for term in terms.iter().take(nt + 1).skip(2) {
            w *= q;
            for (v, x) in vals.iter_mut().zip(term) {
                v.re += w * x;
            }
        }
        let tail = q.powi(nt as i32);
        if t == t_max {
            tail_at_max = tail;
        }
        if opts.tail_closure {
            for (v, x) in vals.iter_mut().zip(&nodes) {
                v.re += tail * (-0.5 * s2 * x * x).exp();
            }
        }
        out.push(CfGrid::from_half(grid, vals, s2, t));
    }
    Ok((
        out,
        WildReport {
            terms: n_terms,
            tail_weight: tail_at_max,
            products,
        },
    ))
}

/// Full-circle angular average `(1/2pi) int g1(xi cos) g2(xi sin)` of two
/// gridded characteristic functions, by Simpson doubling on `[0, 2pi]`.
pub fn wild_product(g1: &CfGrid, g2: &CfGrid, xi: f64) -> Result<Complex64> {
    for g in [g1, g2] {
        if xi.abs() > g.params.xi_max {
            return Err(KacError::OutOfRange {
                xi,
                xi_max: g.params.xi_max,
            });
        }
    }
    let f = |th: f64| -> Complex64 {
        let (s, c) = th.sin_cos();
        g1.eval(xi * c).expect("in range") * g2.eval(xi * s).expect("in range")
    };
    Ok(circle_average(&f, 1e-12))
}

/// `(1/2pi) int_0^{2pi} f` by composite Simpson, doubling from 256 panels
/// until successive sums agree to `tol` (at most `2^16` panels).
pub fn circle_average<F: Fn(f64) -> Complex64>(f: &F, tol: f64) -> Complex64 {
    let simpson = |n: usize| -> Complex64 {
        let d = 2.0 * PI / n as f64;
        let mut acc = f(0.0) + f(2.0 * PI);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(k as f64 * d) * w;
        }
        acc * (d / 3.0) / (2.0 * PI)
    };
    let mut n = 256;
    let mut s = simpson(n);
    while n < 1 << 16 {
        let s2 = simpson(2 * n);
        if (s2 - s).norm() <= tol {
            return s2;
        }
        n *= 2;
        s = s2;
    }
    s
}
