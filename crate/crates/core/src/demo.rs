//! End-to-end run of every acceptance check, writing CSV artifacts and a
//! markdown summary.

use crate::angular::{alpha, decay_exponent};
use crate::config::DatumSpec;
use crate::cumulants::{cumulants_to_moments, moments_to_cumulants, MomentVector};
use crate::datum::{make_zero_kurtosis_mixture, InitialDatum};
use crate::edgeworth::{lemma_suite, LemmaId, LemmaSetup};
use crate::error::Result;
use crate::mckean::{empirical_cf, max_sphere_defect, sample_batch, stream, weight_power_stats};
use crate::numerics::adaptive_simpson;
use crate::rate::{run_experiment, write_csv, time_grid, ExperimentConfig, Metric, Solver, Verdict};
use crate::spectral::{bobylev_trajectory, wild_series, GridParams, SolverOptions, WildOptions};
use rand::Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Stream batch for the random moment vectors of the cumulant check.
const ROUND_TRIP_BATCH: u64 = 4;

struct Check {
    id: usize,
    name: &'static str,
    observed: String,
    pass: bool,
    seconds: f64,
}

fn csv<R: Serialize>(dir: &Path, name: &str, header: &str, rows: &[R]) -> Result<()> {
    write_csv(&dir.join(name), header, rows)
}

fn timed<F: FnOnce() -> Result<(String, bool)>>(
    checks: &mut Vec<Check>,
    id: usize,
    name: &'static str,
    f: F,
) -> Result<()> {
    let start = Instant::now();
    let (observed, pass) = f()?;
    let seconds = start.elapsed().as_secs_f64();
    log::info!("criterion {id}: {} ({observed})", if pass { "pass" } else { "FAIL" });
    checks.push(Check {
        id,
        name,
        observed,
        pass,
        seconds,
    });
    Ok(())
}

/// Runs all checks, writes artifacts under `dir` and returns `report.md`.
pub fn run_demo(dir: &Path, seed: u64) -> Result<String> {
    let mut checks = Vec::new();

    timed(&mut checks, 1, "angular moments", || {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for s in 0..=12 {
            let s = s as f64;
            let q = 2.0 / std::f64::consts::PI
                * adaptive_simpson(&|th: f64| th.sin().powf(s), 0.0, std::f64::consts::FRAC_PI_2, 1e-14);
            let a = alpha(s)?;
            worst = worst.max((a - q).abs());
            rows.push((s, a, decay_exponent(s)?, q));
        }
        csv(dir, "alpha.csv", "s,alpha,exponent,quadrature", &rows)?;
        let exact = alpha(4.0)? == 0.375 && decay_exponent(4.0)? == 0.25;
        Ok((format!("alpha(4) exact: {exact}, max quadrature gap {worst:.1e}"), exact && worst <= 1e-10))
    })?;

    timed(&mut checks, 2, "Gaussian fixed point", || {
        let g = InitialDatum::gaussian(1.0)?;
        let times = time_grid(5.0, 0.5);
        let opts = SolverOptions::for_datum(&g).with_grid(GridParams::new(1 << 10, 12.0)?);
        let (b, _) = bobylev_trajectory(&g, &times, &opts)?;
        let wopts = WildOptions {
            tail_closure: true,
            ..Default::default()
        };
        let (w, _) = wild_series(&g, &times, GridParams::new(1 << 9, 6.0)?, &wopts)?;
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for (label, snaps) in [("bobylev", &b), ("wild", &w)] {
            for s in snaps.iter() {
                let dev = s.sup_distance_to_maxwellian();
                worst = worst.max(dev);
                rows.push((s.t, label, dev));
            }
        }
        csv(dir, "gaussian_fixed_point.csv", "t,method,sup_deviation", &rows)?;
        Ok((format!("max deviation {worst:.2e}"), worst < 1e-6))
    })?;

    // The uniform trajectory serves both the cumulant and the sampling checks.
    let u = InitialDatum::uniform_unit();
    let (usnaps, _) = bobylev_trajectory(&u, &[1.0, 2.0, 4.0], &SolverOptions::for_datum(&u))?;

    timed(&mut checks, 3, "fourth cumulant decay", || {
        let k0 = u.cumulants.get(4);
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for s in &usnaps {
            let k = s.kappa4()?;
            let want = k0 * (-s.t / 4.0).exp();
            let rel = (k - want).abs() / k0.abs();
            worst = worst.max(rel);
            rows.push((s.t, k, want, rel));
        }
        csv(dir, "kappa4.csv", "t,kappa4,expected,relative_error", &rows)?;
        Ok((format!("max relative error {worst:.2e}"), worst <= 1e-3))
    })?;

    timed(&mut checks, 4, "tree sphere identity", || {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for t in [0.5, 1.0, 2.0] {
            let d = max_sphere_defect(t, 1_000_000, seed)?;
            worst = worst.max(d);
            rows.push((t, 1_000_000usize, d));
        }
        csv(dir, "sphere.csv", "t,trees,max_defect", &rows)?;
        Ok((format!("max defect {worst:.1e}"), worst < 1e-12))
    })?;

    timed(&mut checks, 5, "weight power sums", || {
        let ms = [3.0, 4.0, 6.0];
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for t in [0.5, 1.0, 2.0] {
            for (m, (mean, se)) in ms.iter().zip(weight_power_stats(t, &ms, 100_000, seed)?) {
                let want = (-decay_exponent(*m)? * t).exp();
                let z = (mean - want).abs() / se;
                worst = worst.max(z);
                rows.push((*m, t, mean, se, want, z));
            }
        }
        csv(dir, "weight_powers.csv", "m,t,mean,se,expected,z", &rows)?;
        Ok((format!("max |z| {worst:.2}"), worst <= 3.0))
    })?;

    timed(&mut checks, 6, "McKean vs Bobylev", || {
        let n = 100_000;
        let batch = sample_batch(&u, 1.0, n, seed)?;
        let g = &usnaps[0];
        let nodes: Vec<f64> = g.half_nodes().into_iter().filter(|x| *x <= 10.0).collect();
        let emp = empirical_cf(&batch, &nodes);
        let bound = 4.0 / (n as f64).sqrt();
        let mut rows = Vec::new();
        let mut ok = 0usize;
        for ((x, e), v) in nodes.iter().zip(&emp.values).zip(g.half_values()) {
            let dev = (e - v).norm();
            ok += usize::from(dev <= bound);
            rows.push((*x, e.re, e.im, v.re, v.im, dev));
        }
        csv(dir, "cf_crossval.csv", "xi,empirical_re,empirical_im,bobylev_re,bobylev_im,deviation", &rows)?;
        let frac = ok as f64 / nodes.len() as f64;
        Ok((format!("{:.2}% of {} nodes within 4/sqrt(n)", 100.0 * frac, nodes.len()), frac >= 0.99))
    })?;

    let rate = |name: &str, cfg: ExperimentConfig| -> Result<crate::rate::DecaySeries> {
        let s = run_experiment(&cfg)?;
        s.write_series_csv(&dir.join(format!("rate_{name}_series.csv")))?;
        s.write_fit_csv(&dir.join(format!("rate_{name}_fit.csv")))?;
        Ok(s)
    };

    timed(&mut checks, 7, "uniform decay rate", || {
        let s = rate("uniform", ExperimentConfig::new(DatumSpec::Uniform { a: 3f64.sqrt() }))?;
        let Some(f) = &s.fit else {
            return Ok((format!("no fit: {}", s.fit_error.unwrap_or_default()), false));
        };
        let pass = (-0.30..=-0.21).contains(&f.slope) && f.compensated_liminf > 0.0;
        Ok((
            format!("slope {:.4}, floor {:.3e}, verdict {}", f.slope, f.compensated_liminf, s.verdict),
            pass,
        ))
    })?;

    timed(&mut checks, 8, "zero-kurtosis decay rate", || {
        let mut cfg = ExperimentConfig::new(DatumSpec::MixtureZeroK4);
        cfg.delta = Some(1.0);
        let s = rate("mixture", cfg)?;
        let Some(f) = &s.fit else {
            return Ok((format!("no fit: {}", s.fit_error.unwrap_or_default()), false));
        };
        Ok((format!("slope {:.4}, verdict {}", f.slope, s.verdict), f.slope <= -0.30))
    })?;

    timed(&mut checks, 9, "odd perturbation decay", || {
        let mut cfg = ExperimentConfig::new(DatumSpec::OddPerturbed {
            sigma: 1.0,
            epsilon: 0.3,
        });
        cfg.times = time_grid(5.0, 0.5);
        cfg.fit_window = (1.0, 5.0);
        let s = rate("odd_perturbed", cfg)?;
        let tv = s.points(Metric::Tv, Solver::Bobylev);
        let d0 = tv.first().map_or(f64::NAN, |p| p.1);
        let worst = tv
            .iter()
            .map(|(t, v, _)| (v / (d0 * (-t).exp()) - 1.0).abs())
            .fold(0.0, f64::max);
        let pass = tv.len() == 11 && worst <= 0.01;
        Ok((format!("max relative deviation {worst:.2e}, verdict {}", s.verdict), pass && s.verdict == Verdict::P4Exact))
    })?;

    let bases = [
        InitialDatum::gaussian(1.0)?,
        InitialDatum::uniform_unit(),
        make_zero_kurtosis_mixture(),
    ];
    let mut suite = |id, name, lemmas: &[LemmaId], orders: &[(usize, f64)], file: &str| -> Result<()> {
        timed(&mut checks, id, name, || {
            let mut rows = Vec::new();
            let mut violations = 0usize;
            for lemma in lemmas {
                for &(k, delta) in orders {
                    for b in &bases {
                        let setup = LemmaSetup::new(*lemma, b, k, delta)?;
                        let certs = lemma_suite(&setup, 200, 8, seed, 4001)?;
                        let bad = certs.iter().filter(|c| !c.holds()).count();
                        let worst = certs.iter().map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
                        violations += bad;
                        rows.push((lemma.to_string(), b.name.clone(), k, delta, certs.len(), bad, worst));
                    }
                }
            }
            csv(dir, file, "lemma,base,k,delta,trials,violations,max_violation", &rows)?;
            Ok((format!("{violations} violations over {} suites", rows.len()), violations == 0))
        })
    };
    suite(
        10,
        "fourth-order bounds",
        &[LemmaId::L1Punt4, LemmaId::L1Fast, LemmaId::L1Der],
        &[(4, 0.0)],
        "lemma1.csv",
    )?;
    suite(
        11,
        "higher-order bounds",
        &[LemmaId::L2Punt, LemmaId::L2Der],
        &[(4, 1.0), (6, 0.0)],
        "lemma2.csv",
    )?;

    timed(&mut checks, 12, "cumulant calculus", || {
        let mut worst = 0.0f64;
        for i in 0..100u64 {
            let mut rng = stream(seed, ROUND_TRIP_BATCH, i);
            let order = rng.gen_range(2..=10);
            let atoms: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.0))).collect();
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let m: Vec<f64> = (0..=order)
                .map(|r| atoms.iter().map(|(x, w)| w / total * x.powi(r as i32)).sum())
                .collect();
            let mv = MomentVector::new(m.clone())?;
            let back = cumulants_to_moments(&moments_to_cumulants(&mv, order)?, order)?;
            for r in 0..=order {
                worst = worst.max((back.get(r) - m[r]).abs() / m[r].abs().max(1.0));
            }
        }
        let g = InitialDatum::gaussian(1.3)?;
        let k = moments_to_cumulants(&g.moments, 20)?;
        let annihilated = (3..=20).all(|r| k.get(r).abs() <= 1e-9 * g.moments.get(r).abs().max(1.0));
        Ok((
            format!("round-trip error {worst:.1e}, Gaussian cumulants vanish: {annihilated}"),
            worst <= 1e-9 && annihilated,
        ))
    })?;

    let mut report = String::from("# Acceptance report\n\n| # | check | result | observed | seconds |\n|---|---|---|---|---|\n");
    for c in &checks {
        writeln!(
            report,
            "| {} | {} | {} | {} | {:.1} |",
            c.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.observed,
            c.seconds
        )
        .expect("write to string");
    }
    std::fs::write(dir.join("report.md"), &report)?;
    Ok(report)
}
