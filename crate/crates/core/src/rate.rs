//! Decay experiments: evolve a datum over a time grid, measure its distance
//! to the Maxwellian, fit an exponential rate and classify it.

use crate::angular::decay_exponent;
use crate::config::DatumSpec;
use crate::datum::{symmetrize, InitialDatum, Law};
use crate::error::{KacError, Result};
use crate::numerics::linear_fit;
use crate::spectral::{
    bobylev_trajectory, invert_with, sup_cf_distance, tv_distance, wild_series, wild_terms_needed, CfGrid,
    GridParams, InversionOptions, SolverOptions, WildOptions,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Half-width of the T1 band around slope -1/4.
pub const T1_BAND: f64 = 0.05;
/// Margin below `-(1 - 2 alpha_4)` required for a faster-than-quarter verdict.
pub const FASTER_MARGIN: f64 = 0.03;
/// Largest relative deviation of `d(t) e^t` from its initial value for P4.
pub const P4_TOL: f64 = 0.02;
/// Points with `d <= CENSOR * tol` are left out of fits.
pub const CENSOR: f64 = 10.0;
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bobylev,
    Wild,
    Both,
}

/// The solver that produced a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Bobylev,
    Wild,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Bobylev => "bobylev",
            Solver::Wild => "wild",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "tv")]
    Tv,
    #[serde(rename = "sup_cf")]
    SupCf,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Tv => "tv",
            Metric::SupCf => "sup_cf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "T1-sharp")]
    T1Sharp,
    #[serde(rename = "T2-faster")]
    T2Faster,
    #[serde(rename = "T3-faster")]
    T3Faster,
    #[serde(rename = "P4-exact")]
    P4Exact,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::T1Sharp,
        Verdict::T2Faster,
        Verdict::T3Faster,
        Verdict::P4Exact,
        Verdict::Inconclusive,
    ];
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::T1Sharp => "T1-sharp",
            Verdict::T2Faster => "T2-faster",
            Verdict::T3Faster => "T3-faster",
            Verdict::P4Exact => "P4-exact",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl FromStr for Verdict {
    type Err = KacError;
    fn from_str(s: &str) -> Result<Self> {
        Verdict::ALL
            .into_iter()
            .find(|v| v.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| KacError::Config(format!("unknown verdict '{s}'")))
    }
}

/// Grid, step and truncation settings for both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Bobylev grid size; `2^13` when absent.
    pub grid_n: Option<usize>,
    /// Grid half-width; the datum's default when absent.
    pub xi_max: Option<f64>,
    pub dt: f64,
    pub ode_tol: f64,
    pub wild_grid_n: usize,
    pub wild_xi_max: Option<f64>,
    pub wild_tol: f64,
    pub wild_cap: usize,
    pub tail_closure: bool,
    /// Accuracy attached to each distance; values below ten times this are
    /// not fitted.
    pub distance_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_n: None,
            xi_max: None,
            dt: 0.02,
            ode_tol: 1e-9,
            wild_grid_n: 1 << 10,
            wild_xi_max: None,
            wild_tol: 1e-6,
            wild_cap: 400,
            tail_closure: false,
            distance_tol: 1e-7,
        }
    }
}

impl SolverSettings {
    pub fn bobylev_options(&self, d: &InitialDatum) -> Result<SolverOptions> {
        let grid = GridParams::new(
            self.grid_n.unwrap_or(1 << 13),
            self.xi_max.unwrap_or_else(|| d.default_xi_max()),
        )?;
        let mut o = SolverOptions::for_datum(d).with_grid(grid);
        o.dt = self.dt;
        o.ode_tol = self.ode_tol;
        Ok(o)
    }

    pub fn wild_grid(&self, d: &InitialDatum) -> Result<GridParams> {
        GridParams::new(
            self.wild_grid_n,
            self.wild_xi_max.or(self.xi_max).unwrap_or_else(|| d.default_xi_max()),
        )
    }

    pub fn wild_options(&self) -> WildOptions {
        WildOptions {
            tol: self.wild_tol,
            cap: self.wild_cap,
            tail_closure: self.tail_closure,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datum: DatumSpec,
    pub times: Vec<f64>,
    pub method: Method,
    pub metrics: Vec<Metric>,
    pub fit_window: (f64, f64),
    /// Moment excess used for the predicted exponent; chosen from the
    /// datum when absent.
    pub delta: Option<f64>,
    pub solver: SolverSettings,
    pub seed: u64,
    pub expect: Option<Verdict>,
}

impl ExperimentConfig {
    /// Bobylev run on `t = 0, 0.5, ..., 10`, both metrics, window `[3, 10]`.
    pub fn new(datum: DatumSpec) -> Self {
        Self {
            datum,
            times: time_grid(10.0, 0.5),
            method: Method::Bobylev,
            metrics: vec![Metric::Tv, Metric::SupCf],
            fit_window: (3.0, 10.0),
            delta: None,
            solver: SolverSettings::default(),
            seed: 0,
            expect: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KacError::Config(m));
        if self.times.is_empty() {
            return bad("time grid is empty".into());
        }
        if self.times.iter().any(|t| !t.is_finite()) || self.times[0] < 0.0 {
            return bad("times must be finite and >= 0".into());
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("times must increase strictly".into());
        }
        if self.metrics.is_empty() {
            return bad("no distance metric selected".into());
        }
        let (lo, hi) = self.fit_window;
        let (t0, tm) = (self.times[0], *self.times.last().unwrap());
        if !(lo < hi && lo >= t0 && hi <= tm) {
            return bad(format!("fit window [{lo}, {hi}] must be a proper interval inside [{t0}, {tm}]"));
        }
        if let Some(d) = self.delta {
            if !(0.0..2.0).contains(&d) {
                return bad(format!("delta = {d} must lie in [0, 2)"));
            }
        }
        Ok(())
    }
}

/// `0, step, 2 step, ..., t_end` without accumulated rounding.
pub fn time_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub t: f64,
    pub metric: Metric,
    pub value: f64,
    pub method: Solver,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    /// Matching upper and lower bounds.
    Sharp,
    /// The distance decays at least this fast.
    UpperBound,
    Exact,
    /// The datum is already the equilibrium.
    Equilibrium,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedRate {
    /// `d(t) ~ e^{-exponent t}`; `None` for the equilibrium and unknown cases.
    pub exponent: Option<f64>,
    pub kind: RateKind,
    pub chi: Option<usize>,
    pub delta: Option<f64>,
    pub rationale: String,
}

/// Candidate moment excesses, largest first.
const DELTA_MENU: [f64; 4] = [1.5, 1.0, 0.5, 0.0];

fn vanishes(k: f64, scale: f64) -> bool {
    k.abs() <= 1e-12 * scale
}

/// Exponent predicted by the decay theorems for `d`.
pub fn predicted_rate(d: &InitialDatum, delta: Option<f64>) -> PredictedRate {
    let s = symmetrize(d);
    let s2 = s.sigma2();
    let scale = |r: usize| s2.powi(r as i32 / 2);
    let order = s.cumulants.order();
    let higher_zero = (3..=order).all(|r| vanishes(s.cumulants.get(r), scale(r)));
    let gaussian_sym = matches!(s.law, Law::Gaussian { .. }) || higher_zero;
    let pr = |exponent, kind, chi, delta, rationale: String| PredictedRate {
        exponent,
        kind,
        chi,
        delta,
        rationale,
    };
    if gaussian_sym {
        return if d.symmetric {
            pr(None, RateKind::Equilibrium, None, None, "datum is the Maxwellian".into())
        } else {
            pr(
                Some(1.0),
                RateKind::Exact,
                None,
                None,
                "odd perturbation of the Maxwellian decays as e^{-t}".into(),
            )
        };
    }
    let k4 = s.cumulants.get(4);
    if !vanishes(k4, scale(4)) {
        return pr(
            Some(0.25),
            RateKind::Sharp,
            Some(2),
            None,
            format!("kappa_4 of the symmetrized datum is {k4:.6e}"),
        );
    }
    // chi = largest index with kappa_4, ..., kappa_{2 chi} all zero.
    let mut chi = 2;
    while 2 * chi + 2 <= order && vanishes(s.cumulants.get(2 * chi + 2), scale(2 * chi + 2)) {
        chi += 1;
    }
    if 2 * chi + 2 > order {
        return pr(
            None,
            RateKind::Unknown,
            None,
            None,
            format!("even cumulants vanish through order {order}; cannot locate the first nonzero one"),
        );
    }
    let base = (2 * chi) as f64;
    let delta = match delta {
        Some(x) => Some(x),
        None => DELTA_MENU.into_iter().find(|x| d.abs_moment(base + x).is_finite()),
    };
    let Some(delta) = delta else {
        return pr(
            None,
            RateKind::Unknown,
            Some(chi),
            None,
            format!("absolute moment of order {base} is not finite"),
        );
    };
    let s_order = base + delta;
    match decay_exponent(s_order) {
        Ok(e) => pr(
            Some(e),
            RateKind::UpperBound,
            Some(chi),
            Some(delta),
            format!(
                "kappa_4..kappa_{} vanish, kappa_{} = {:.6e}; exponent 1 - 2 alpha({s_order})",
                2 * chi,
                2 * chi + 2,
                s.cumulants.get(2 * chi + 2)
            ),
        ),
        Err(e) => pr(None, RateKind::Unknown, Some(chi), Some(delta), e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    /// `min d(t) e^{t p}` over the fitted points, `p` the predicted exponent
    /// (or `-slope` without a prediction).
    pub compensated_liminf: f64,
    pub points: usize,
}

/// Least squares of `log d` against `t` over `window`. Each point is
/// `(t, d, tol)`; points with `d <= 10 tol` are censored.
pub fn fit_rate(points: &[(f64, f64, f64)], window: (f64, f64), predicted: Option<f64>) -> Result<RateFit> {
    let inside: Vec<&(f64, f64, f64)> =
        points.iter().filter(|p| p.0 >= window.0 && p.0 <= window.1).collect();
    let kept: Vec<(f64, f64)> = inside
        .iter()
        .filter(|p| p.1.is_finite() && p.1 > CENSOR * p.2 && p.1 > 0.0)
        .map(|p| (p.0, p.1))
        .collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(KacError::Fit(format!(
            "{} of {} points in [{}, {}] lie above {CENSOR} x tolerance; need {MIN_FIT_POINTS}",
            kept.len(),
            inside.len(),
            window.0,
            window.1
        )));
    }
    let t: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, _) =
        linear_fit(&t, &y).ok_or_else(|| KacError::Fit("degenerate time points".into()))?;
    let rss: f64 = t.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let p = predicted.unwrap_or(-slope);
    let compensated_liminf = kept.iter().map(|(t, d)| d * (t * p).exp()).fold(f64::INFINITY, f64::min);
    Ok(RateFit {
        slope,
        intercept,
        residual: (rss / kept.len() as f64).sqrt(),
        compensated_liminf,
        points: kept.len(),
    })
}

/// Classifies a measured series. `points` are `(t, d, tol)` for one metric
/// and one solver, ascending in `t`.
pub fn theorem_verdict(points: &[(f64, f64, f64)], fit: Option<&RateFit>, d: &InitialDatum) -> Verdict {
    if let Some(f) = fit {
        if (f.slope + 0.25).abs() <= T1_BAND && f.compensated_liminf > 0.0 {
            return Verdict::T1Sharp;
        }
        let quarter = decay_exponent(4.0).expect("alpha(4) is finite");
        if f.slope <= -quarter - FASTER_MARGIN {
            let s = symmetrize(d);
            let s2 = s.sigma2();
            let zero = |r: usize| vanishes(s.cumulants.get(r), s2.powi(r as i32 / 2));
            let order = s.cumulants.order();
            let non_gaussian = (3..=order).any(|r| !zero(r));
            if zero(4) && non_gaussian {
                return if !zero(6) { Verdict::T2Faster } else { Verdict::T3Faster };
            }
        }
    }
    let live: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1.is_finite() && p.1 > CENSOR * p.2)
        .map(|p| (p.0, p.1))
        .collect();
    if live.len() >= 2 {
        let (t0, d0) = live[0];
        let dev = live
            .iter()
            .map(|(t, v)| (v * (t - t0).exp() / d0 - 1.0).abs())
            .fold(0.0, f64::max);
        if dev <= P4_TOL {
            return Verdict::P4Exact;
        }
    } else if !points.is_empty() && live.is_empty() && predicted_rate(d, None).kind == RateKind::Equilibrium {
        // Zero perturbation: the equilibrium case of the exact e^{-t} law.
        return Verdict::P4Exact;
    }
    Verdict::Inconclusive
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    pub datum: String,
    pub rows: Vec<DistanceRow>,
    /// Solver failures; the rows hold whatever was computed.
    pub failures: Vec<String>,
    pub fit_metric: Metric,
    pub fit_method: Solver,
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    pub predicted: PredictedRate,
    pub verdict: Verdict,
}

impl DecaySeries {
    /// `(t, d, tol)` for one metric and solver.
    pub fn points(&self, metric: Metric, method: Solver) -> Vec<(f64, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.method == method)
            .map(|r| (r.t, r.value, r.tol))
            .collect()
    }

    pub fn write_series_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for r in &self.rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_fit_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            slope: Option<f64>,
            intercept: Option<f64>,
            residual: Option<f64>,
            compensated_liminf: Option<f64>,
            predicted: Option<f64>,
            verdict: Verdict,
        }
        let f = self.fit.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.serialize(Row {
            slope: f.map(|f| f.slope),
            intercept: f.map(|f| f.intercept),
            residual: f.map(|f| f.residual),
            compensated_liminf: f.map(|f| f.compensated_liminf),
            predicted: self.predicted.exponent,
            verdict: self.verdict,
        })
        .map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }
}

/// Writes `header` and one record per row; floats use shortest round-trip
/// formatting.
pub fn write_csv<R: Serialize>(path: &Path, header: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header.split(',')).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> KacError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => KacError::Io(io),
        other => KacError::Config(format!("csv: {other:?}")),
    }
}

fn measure(
    g: &CfGrid,
    d: &InitialDatum,
    metrics: &[Metric],
    method: Solver,
    tol: f64,
    rows: &mut Vec<DistanceRow>,
    failures: &mut Vec<String>,
) {
    for &metric in metrics {
        let value = match metric {
            Metric::SupCf => Ok(sup_cf_distance(g)),
            Metric::Tv => invert_with(g, &InversionOptions::subtract_leading(d.law.clone()))
                .and_then(|f| tv_distance(&f, d.sigma2().sqrt())),
        };
        match value {
            Ok(value) => rows.push(DistanceRow {
                t: g.t,
                metric,
                value,
                method,
                tol,
            }),
            Err(e) => failures.push(format!("{method} {metric} at t = {}: {e}", g.t)),
        }
    }
}

/// Snapshots at `times` from the selected solvers. Wild skips times whose
/// truncation exceeds the cap (unless the tail closure is on); every skip or
/// solver error is reported as a failure line instead of aborting.
pub fn solve_snapshots(
    d: &InitialDatum,
    times: &[f64],
    method: Method,
    s: &SolverSettings,
) -> Result<(Vec<(Solver, CfGrid)>, Vec<String>)> {
    let mut out = Vec::new();
    let mut failures = Vec::new();
    if matches!(method, Method::Bobylev | Method::Both) {
        match bobylev_trajectory(d, times, &s.bobylev_options(d)?) {
            Ok((snaps, _)) => out.extend(snaps.into_iter().map(|g| (Solver::Bobylev, g))),
            Err(e) => failures.push(format!("bobylev: {e}")),
        }
    }
    if matches!(method, Method::Wild | Method::Both) {
        let (ok, skipped): (Vec<f64>, Vec<f64>) = times
            .iter()
            .partition(|t| s.tail_closure || wild_terms_needed(**t, s.wild_tol) <= s.wild_cap);
        for t in skipped {
            failures.push(format!(
                "wild at t = {t}: needs {} terms, cap is {}",
                wild_terms_needed(t, s.wild_tol),
                s.wild_cap
            ));
        }
        if !ok.is_empty() {
            match wild_series(d, &ok, s.wild_grid(d)?, &s.wild_options()) {
                Ok((snaps, _)) => out.extend(snaps.into_iter().map(|g| (Solver::Wild, g))),
                Err(e) => failures.push(format!("wild: {e}")),
            }
        }
    }
    Ok((out, failures))
}

/// Distance rows for `d` at `times`, with solver and metric failures.
pub fn measure_distances(
    d: &InitialDatum,
    times: &[f64],
    method: Method,
    metrics: &[Metric],
    s: &SolverSettings,
) -> Result<(Vec<DistanceRow>, Vec<String>)> {
    let (snaps, mut failures) = solve_snapshots(d, times, method, s)?;
    let mut rows = Vec::new();
    for (solver, g) in &snaps {
        let tol = match solver {
            Solver::Bobylev => s.distance_tol,
            Solver::Wild => s.wild_tol.max(s.distance_tol),
        };
        measure(g, d, metrics, *solver, tol, &mut rows, &mut failures);
    }
    Ok((rows, failures))
}

/// Runs the configured solvers and fits the primary series (TV when
/// requested, else sup_cf; Bobylev when run, else Wild).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<DecaySeries> {
    cfg.validate()?;
    let d = cfg.datum.build()?;
    let (rows, failures) = measure_distances(&d, &cfg.times, cfg.method, &cfg.metrics, &cfg.solver)?;

    let fit_metric = if cfg.metrics.contains(&Metric::Tv) { Metric::Tv } else { Metric::SupCf };
    let fit_method = if cfg.method == Method::Wild { Solver::Wild } else { Solver::Bobylev };
    let predicted = predicted_rate(&d, cfg.delta);
    let mut series = DecaySeries {
        datum: d.name.clone(),
        rows,
        failures,
        fit_metric,
        fit_method,
        fit: None,
        fit_error: None,
        predicted,
        verdict: Verdict::Inconclusive,
    };
    let pts = series.points(fit_metric, fit_method);
    match fit_rate(&pts, cfg.fit_window, series.predicted.exponent) {
        Ok(f) => series.fit = Some(f),
        Err(e) => series.fit_error = Some(e.to_string()),
    }
    series.verdict = theorem_verdict(&pts, series.fit.as_ref(), &d);
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{make_odd_perturbed_gaussian, make_zero_kurtosis_mixture};
    use crate::angular::alpha;

    fn synth<F: Fn(f64) -> f64>(f: F) -> Vec<(f64, f64, f64)> {
        time_grid(10.0, 0.25).into_iter().map(|t| (t, f(t), 1e-12)).collect()
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let fit = fit_rate(&synth(|t| 3.0 * (-t / 4.0).exp()), (3.0, 10.0), Some(0.25)).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.compensated_liminf - 3.0).abs() < 1e-12);
        assert_eq!(fit.points, 29);
    }

    #[test]
    fn perturbed_exponential() {
        let pts = synth(|t| (-t / 4.0).exp() * (1.0 + 0.1 * t.sin()));
        let fit = fit_rate(&pts, (3.0, 10.0), Some(0.25)).unwrap();
        assert!((fit.slope + 0.25).abs() < 0.02, "{}", fit.slope);
        assert!(fit.residual > 0.0);
        assert!(fit.compensated_liminf > 0.0);
    }

    #[test]
    fn floor_is_censored() {
        let pts: Vec<_> = time_grid(10.0, 0.5).into_iter().map(|t| (t, 5e-9, 1e-9)).collect();
        assert!(matches!(fit_rate(&pts, (3.0, 10.0), None), Err(KacError::Fit(_))));
        let few: Vec<_> = time_grid(10.0, 2.5).into_iter().map(|t| (t, (-t).exp(), 1e-12)).collect();
        assert!(fit_rate(&few, (3.0, 10.0), None).is_err());
    }

    #[test]
    fn predictions() {
        let u = predicted_rate(&InitialDatum::uniform_unit(), None);
        assert_eq!((u.exponent, u.kind), (Some(0.25), RateKind::Sharp));

        let m = make_zero_kurtosis_mixture();
        let p = predicted_rate(&m, Some(1.0));
        let want = 1.0 - 2.0 * alpha(5.0).unwrap();
        assert!((p.exponent.unwrap() - want).abs() < 1e-15);
        assert!((want - 0.3209).abs() < 5e-5);
        assert_eq!((p.kind, p.chi), (RateKind::UpperBound, Some(2)));
        let auto = predicted_rate(&m, None);
        assert_eq!(auto.delta, Some(1.5));

        let o = make_odd_perturbed_gaussian(1.0, 0.3).unwrap().into_datum();
        assert_eq!(predicted_rate(&o, None).exponent, Some(1.0));
        let g = predicted_rate(&InitialDatum::gaussian(1.0).unwrap(), None);
        assert_eq!((g.exponent, g.kind), (None, RateKind::Equilibrium));
    }

    #[test]
    fn verdict_rules() {
        let u = InitialDatum::uniform_unit();
        let pts = synth(|t| 0.2 * (-t / 4.0).exp());
        let f = fit_rate(&pts, (3.0, 10.0), Some(0.25)).unwrap();
        assert_eq!(theorem_verdict(&pts, Some(&f), &u), Verdict::T1Sharp);

        let m = make_zero_kurtosis_mixture();
        let pts = synth(|t| 0.2 * (-0.36 * t).exp());
        let f = fit_rate(&pts, (3.0, 10.0), None).unwrap();
        assert_eq!(theorem_verdict(&pts, Some(&f), &m), Verdict::T2Faster);
        // Same numbers, but kappa_4 != 0: no faster-rate verdict.
        assert_eq!(theorem_verdict(&pts, Some(&f), &u), Verdict::Inconclusive);

        let o = make_odd_perturbed_gaussian(1.0, 0.3).unwrap().into_datum();
        let pts = synth(|t| 0.15 * (-t).exp());
        let f = fit_rate(&pts, (3.0, 10.0), None).unwrap();
        assert_eq!(theorem_verdict(&pts, Some(&f), &o), Verdict::P4Exact);
        let bent = synth(|t| 0.15 * (-t).exp() * (1.0 + 0.05 * t));
        assert_eq!(theorem_verdict(&bent, None, &o), Verdict::Inconclusive);
    }

    #[test]
    fn verdict_names_round_trip() {
        for v in Verdict::ALL {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
        assert!("T4".parse::<Verdict>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(DatumSpec::Uniform { a: 3f64.sqrt() });
        assert!(c.validate().is_ok());
        c.fit_window = (3.0, 12.0);
        assert!(c.validate().is_err());
        c.fit_window = (3.0, 10.0);
        c.times = vec![0.0, 1.0, 1.0];
        assert!(c.validate().is_err());
        c.times = vec![-1.0, 1.0];
        assert!(c.validate().is_err());
    }

    fn small(spec: DatumSpec, times: Vec<f64>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(spec);
        c.fit_window = (times[0], *times.last().unwrap());
        c.times = times;
        c.solver.grid_n = Some(1 << 10);
        c.solver.xi_max = Some(12.0);
        c
    }

    #[test]
    fn gaussian_experiment_is_at_equilibrium() {
        let s = run_experiment(&small(DatumSpec::Gaussian { sigma: 1.0 }, vec![0.0, 0.5, 1.0, 1.5, 2.0])).unwrap();
        assert!(s.failures.is_empty(), "{:?}", s.failures);
        assert_eq!(s.rows.len(), 10);
        assert!(s.rows.iter().all(|r| r.value < 1e-6));
        assert!(s.fit.is_none() && s.fit_error.is_some());
        assert_eq!(s.verdict, Verdict::P4Exact);
    }

    #[test]
    fn odd_perturbation_decays_as_exp() {
        let spec = DatumSpec::OddPerturbed { sigma: 1.0, epsilon: 0.3 };
        let s = run_experiment(&small(spec, time_grid(3.0, 0.5))).unwrap();
        let tv = s.points(Metric::Tv, Solver::Bobylev);
        for (t, v, _) in &tv {
            assert!((v / tv[0].1 - (-t).exp()).abs() < 1e-2 * (-t).exp());
        }
        assert_eq!(s.verdict, Verdict::P4Exact);
        assert!((s.fit.unwrap().slope + 1.0).abs() < 0.01);
    }

    #[test]
    fn runs_are_deterministic_and_coherent() {
        let mut c = small(DatumSpec::Uniform { a: 3f64.sqrt() }, time_grid(2.0, 0.5));
        c.solver.grid_n = Some(1 << 11);
        c.solver.xi_max = Some(40.0);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        let tv = a.points(Metric::Tv, Solver::Bobylev);
        let sup = a.points(Metric::SupCf, Solver::Bobylev);
        for (x, y) in tv.iter().zip(&sup) {
            assert!(0.5 * y.1 <= x.1 + 2.0 * x.2, "t = {}: {} vs {}", x.0, y.1, x.1);
            assert!((0.0..=1.0).contains(&x.1));
        }
    }

    #[test]
    fn series_and_fit_files() {
        let s = run_experiment(&small(DatumSpec::Gaussian { sigma: 1.0 }, vec![0.0, 1.0, 2.0])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.write_series_csv(&dir.path().join("series.csv")).unwrap();
        s.write_fit_csv(&dir.path().join("fit.csv")).unwrap();
        let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
        assert_eq!(series.lines().next(), Some("t,metric,value,method,tol"));
        assert_eq!(series.lines().count(), 7);
        let fit = std::fs::read_to_string(dir.path().join("fit.csv")).unwrap();
        assert_eq!(fit.lines().next(), Some("slope,intercept,residual,compensated_liminf,predicted,verdict"));
        assert_eq!(fit.lines().nth(1), Some(",,,,,P4-exact"));
    }
}
