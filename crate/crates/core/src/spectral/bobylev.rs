use super::grid::{CfGrid, GridParams};
use super::theta::{Plan, ThetaRule};
use crate::datum::InitialDatum;
use crate::error::{KacError, Result};
use num_complex::Complex64;

/// Time-stepping and quadrature settings for [`bobylev_trajectory`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub grid: GridParams,
    pub dt: f64,
    pub theta: ThetaRule,
    /// Tolerance on the Richardson estimate of the local error of one step.
    pub ode_tol: f64,
    /// Steps between Richardson checks (and quadrature recalibrations).
    pub check_every: usize,
}

impl SolverOptions {
    pub fn for_datum(d: &InitialDatum) -> Self {
        Self {
            grid: GridParams::for_datum(d),
            dt: 0.02,
            theta: ThetaRule::default(),
            ode_tol: 1e-9,
            check_every: 50,
        }
    }

    pub fn with_grid(mut self, grid: GridParams) -> Self {
        self.grid = grid;
        self
    }
}

/// Diagnostics collected along a run.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub steps: usize,
    pub rhs_evals: usize,
    /// Largest Richardson error estimate seen at a check.
    pub richardson_max: f64,
    pub final_dt: f64,
    pub halvings: usize,
    /// Largest number of nodes whose panel count hit the cap at a calibration.
    pub unconverged_nodes: usize,
    pub max_panels: usize,
}

struct Rhs<'a> {
    theta: &'a ThetaRule,
    h: f64,
    panels: Vec<usize>,
    plan: Option<Plan>,
    evals: usize,
}

/// Stencil tables above this size are not built; products fall back to
/// on-the-fly interpolation.
const PLAN_BYTES_MAX: usize = 1 << 29;

impl Rhs<'_> {
    fn eval(&mut self, y: &[Complex64]) -> Vec<Complex64> {
        self.evals += 1;
        let re: Vec<f64> = y.iter().map(|c| c.re).collect();
        let gain = match &self.plan {
            Some(p) => p.product(&re, None),
            None => self.theta.product(&re, None, self.h, &self.panels),
        };
        gain.iter().zip(y).map(|(g, v)| Complex64::new(*g, 0.0) - v).collect()
    }

    fn rk4(&mut self, y: &[Complex64], dt: f64) -> Vec<Complex64> {
        let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, k)| x + k * s).collect()
        };
        let k1 = self.eval(y);
        let k2 = self.eval(&axpy(y, &k1, dt / 2.0));
        let k3 = self.eval(&axpy(y, &k2, dt / 2.0));
        let k4 = self.eval(&axpy(y, &k3, dt));
        y.iter()
            .enumerate()
            .map(|(j, v)| v + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0))
            .collect()
    }

    fn recalibrate(&mut self, y: &[Complex64], report: &mut SolveReport) {
        let re: Vec<f64> = y.iter().map(|c| c.re).collect();
        let cal = self.theta.calibrate(&re, self.h);
        report.unconverged_nodes = report.unconverged_nodes.max(cal.unconverged);
        report.max_panels = report
            .max_panels
            .max(cal.panels.iter().copied().max().unwrap_or(0));
        let entries: usize = cal.panels.iter().map(|n| n + 1).sum();
        self.plan = None;
        if 2 * entries * std::mem::size_of::<(usize, [f64; 4])>() <= PLAN_BYTES_MAX {
            self.plan = Some(self.theta.plan(y.len(), self.h, &cal.panels));
        }
        self.panels = cal.panels;
    }
}

/// Solves the Fourier-side equation from `t = 0` and returns snapshots at
/// the requested times (sorted ascending, each `>= 0`).
pub fn bobylev_trajectory(
    d: &InitialDatum,
    times: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<CfGrid>, SolveReport)> {
    if !(opts.dt > 0.0 && opts.dt <= 0.1) {
        return Err(KacError::Domain(format!("time step {} must lie in (0, 0.1]", opts.dt)));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(KacError::Domain("snapshot times must be finite, >= 0 and sorted".into()));
    }
    let p = opts.grid;
    let s2 = d.sigma2();
    let mut y: Vec<Complex64> = p.half_nodes().into_iter().map(|x| d.cf(x)).collect();
    let mut rhs = Rhs {
        theta: &opts.theta,
        h: p.dxi(),
        panels: Vec::new(),
        plan: None,
        evals: 0,
    };
    let mut report = SolveReport::default();
    rhs.recalibrate(&y, &mut report);

    let mut dt = opts.dt;
    let mut t = 0.0;
    let mut since_check = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while target - t > 1e-12 {
            let step = dt.min(target - t);
            if since_check >= opts.check_every && step == dt {
                rhs.recalibrate(&y, &mut report);
                loop {
                    let full = rhs.rk4(&y, dt);
                    let mid = rhs.rk4(&y, dt / 2.0);
                    let two = rhs.rk4(&mid, dt / 2.0);
                    let err = full
                        .iter()
                        .zip(&two)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max)
                        * 16.0
                        / 15.0;
                    report.richardson_max = report.richardson_max.max(err);
                    if err <= opts.ode_tol || dt < 1e-5 {
                        y = two;
                        t += dt;
                        break;
                    }
                    dt /= 2.0;
                    report.halvings += 1;
                }
                since_check = 0;
            } else {
                y = rhs.rk4(&y, step);
                t += step;
                since_check += 1;
            }
            report.steps += 1;
            let modulus = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if modulus > 1.0 + 1e-6 || !modulus.is_finite() {
                return Err(KacError::Instability { t, modulus });
            }
        }
        t = target;
        out.push(CfGrid::from_half(p, y.clone(), s2, target));
    }
    report.rhs_evals = rhs.evals;
    report.final_dt = dt;
    log::debug!("bobylev run: {report:?}");
    Ok((out, report))
}

/// Single snapshot at `t_end`.
pub fn bobylev_evolve(d: &InitialDatum, t_end: f64, opts: &SolverOptions) -> Result<CfGrid> {
    let (mut v, _) = bobylev_trajectory(d, &[t_end], opts)?;
    Ok(v.pop().expect("one snapshot"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(d: &InitialDatum, n: usize, xi: f64) -> SolverOptions {
        SolverOptions::for_datum(d).with_grid(GridParams::new(n, xi).unwrap())
    }

    #[test]
    fn gaussian_stays_put() {
        let d = InitialDatum::gaussian(1.3).unwrap();
        let opts = small(&d, 1 << 10, 12.0 / 1.3);
        let (snaps, rep) = bobylev_trajectory(&d, &[0.0, 0.5, 2.0], &opts).unwrap();
        assert_eq!(snaps[0].sup_distance_to_maxwellian(), 0.0);
        for s in &snaps {
            assert!(s.sup_distance_to_maxwellian() < 1e-6, "t = {}", s.t);
            assert!(s.check_invariants().ok());
        }
        assert_eq!(rep.unconverged_nodes, 0);
    }

    #[test]
    fn imaginary_part_decays_exponentially() {
        // The gain only sees real parts, so Im phi(t) = Im phi0 e^{-t}.
        let d = InitialDatum::gaussian_shifted(1.0, 0.4).unwrap();
        let opts = small(&d, 1 << 9, 10.0);
        let g = bobylev_evolve(&d, 0.7, &opts).unwrap();
        for (x, v) in g.half_nodes().iter().zip(g.half_values()) {
            let want = d.cf(*x).im * (-0.7f64).exp();
            assert!((v.im - want).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_fourth_cumulant_on_coarse_grid() {
        let d = InitialDatum::uniform_unit();
        let opts = small(&d, 1 << 12, 20.0);
        let g = bobylev_evolve(&d, 1.0, &opts).unwrap();
        let k4 = g.kappa4().unwrap();
        let want = -1.2 * (-0.25f64).exp();
        assert!((k4 - want).abs() < 1e-3 * 1.2, "{k4} vs {want}");
        assert!(g.check_invariants().ok());
    }

    #[test]
    fn bad_steps_rejected() {
        let d = InitialDatum::uniform_unit();
        let mut opts = small(&d, 64, 5.0);
        opts.dt = 0.5;
        assert!(bobylev_evolve(&d, 1.0, &opts).is_err());
        opts.dt = 0.02;
        assert!(bobylev_trajectory(&d, &[1.0, 0.5], &opts).is_err());
    }
}
