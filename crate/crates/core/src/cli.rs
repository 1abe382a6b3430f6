//! Command-line front end: argument parsing, output files and exit codes.

use crate::angular::{alpha, decay_exponent};
use crate::config::{load_experiment, resolve_datum};
use crate::cumulants::{moments_to_cumulants, MomentVector};
use crate::datum::InitialDatum;
use crate::edgeworth::{lemma_suite, LemmaId, LemmaSetup};
use crate::error::{KacError, Result};
use crate::mckean::{sample_batch, weight_power_stats};
use crate::rate::{measure_distances, run_experiment, solve_snapshots, write_csv, Method, Metric, SolverSettings};
use crate::spectral::{invert_with, InversionOptions};
use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Exit code when a run finishes but its stated expectation is not met.
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kacwild", version, about = "Kac equation laboratory: solvers, samplers, bounds and decay rates")]
pub struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    /// Directory receiving every output file and `run.meta`.
    #[arg(long, global = true, default_value = "kacwild-out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Bobylev,
    Wild,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bobylev,
    Wild,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Tv,
    #[value(name = "sup_cf")]
    SupCf,
    All,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GridArgs {
    /// Frequency grid size (power of two).
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Frequency grid half-width.
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Assign the discarded Wild weight to the Maxwellian.
    #[arg(long)]
    pub tail_closure: bool,
}

impl GridArgs {
    fn settings(&self) -> SolverSettings {
        let mut s = SolverSettings {
            grid_n: self.grid_n,
            xi_max: self.xi_max,
            tail_closure: self.tail_closure,
            ..Default::default()
        };
        if let Some(n) = self.grid_n {
            s.wild_grid_n = n;
        }
        s
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print `s,alpha_s,1-2alpha_s`.
    Alpha {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Cumulants from raw moments `m1,m2,...`.
    Cumulants {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        moments: Vec<f64>,
    },
    /// Characteristic function and density snapshots.
    Solve {
        #[arg(long)]
        datum: String,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SolveMethod::Bobylev)]
        method: SolveMethod,
        /// Index file; snapshots go next to it.
        #[arg(long, default_value = "solve.csv")]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// McKean samples of V at one time.
    Sample {
        #[arg(long)]
        datum: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "samples.csv")]
        out: PathBuf,
        /// Weight-power summaries, e.g. `m=4,6`.
        #[arg(long)]
        stats: Option<String>,
    },
    /// Distances to the Maxwellian.
    Distance {
        #[arg(long)]
        datum: String,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Bobylev)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = MetricArg::All)]
        metric: MetricArg,
        #[arg(long, default_value = "distance.csv")]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Random-weight checks of the Edgeworth-type bounds.
    VerifyLemma {
        /// l1, l1fast, l1der, l2 or l2der.
        #[arg(long)]
        lemma: LemmaId,
        #[arg(long)]
        datum: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 4001)]
        grid: usize,
        #[arg(long, default_value = "lemma.csv")]
        out: PathBuf,
    },
    /// Decay experiment from a config file.
    Rate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Every acceptance run, with artifacts and `report.md`.
    Demo,
}

/// Provenance gathered while a command runs.
#[derive(Debug, Default)]
struct Meta {
    config: Vec<u8>,
}

fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.log_level).try_init();
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("error: cannot create {}: {e}", cli.out_dir.display());
        return 3;
    }
    let started = now_unix();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0) as usize)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 3;
        }
    };
    let mut meta = Meta::default();
    let code = match pool.install(|| dispatch(&cli, &mut meta)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let command: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let text = format!(
        "version = {}\ncommand = {}\nconfig_sha256 = {}\nseed = {}\nthreads = {}\nstarted_unix = {started:.3}\nfinished_unix = {:.3}\nexit_code = {code}\n",
        env!("CARGO_PKG_VERSION"),
        command.join(" "),
        sha256_hex(&meta.config),
        cli.seed,
        pool.current_num_threads(),
        now_unix(),
    );
    if let Err(e) = std::fs::write(cli.out_dir.join("run.meta"), text) {
        eprintln!("error: run.meta: {e}");
        return 3;
    }
    code
}

fn out_path(cli: &Cli, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        cli.out_dir.join(p)
    }
}

fn load_datum(arg: &str, meta: &mut Meta) -> Result<InitialDatum> {
    let (spec, text) = resolve_datum(arg)?;
    meta.config = text.into_bytes();
    spec.build()
}

/// `stem_tag.csv` beside `path`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_{tag}.csv"))
}

fn dispatch(cli: &Cli, meta: &mut Meta) -> Result<i32> {
    match &cli.command {
        Command::Alpha { s } => {
            println!("{s},{},{}", alpha(*s)?, decay_exponent(*s)?);
        }
        Command::Cumulants { moments } => {
            let mut m = vec![1.0];
            m.extend(moments);
            let order = moments.len();
            let k = moments_to_cumulants(&MomentVector::new(m)?, order)?;
            let mut text = String::from("order,cumulant\n");
            for r in 1..=order {
                writeln!(text, "{r},{}", k.get(r)).expect("write to string");
            }
            print!("{text}");
            std::fs::write(cli.out_dir.join("cumulants.csv"), text)?;
        }
        Command::Solve {
            datum,
            times,
            method,
            out,
            grid,
        } => {
            let d = load_datum(datum, meta)?;
            let method = match method {
                SolveMethod::Bobylev => Method::Bobylev,
                SolveMethod::Wild => Method::Wild,
            };
            let (snaps, failures) = solve_snapshots(&d, times, method, &grid.settings())?;
            let index = out_path(cli, out);
            let mut entries = Vec::new();
            for (solver, g) in &snaps {
                let cf_path = sibling(&index, &format!("cf_t{}", g.t));
                let rows = g.xi_nodes().into_iter().zip(g.values()).map(|(x, v)| (g.t, x, v.re, v.im));
                write_csv(&cf_path, "t,xi,re,im", rows)?;
                let dens = match invert_with(g, &InversionOptions::subtract_leading(d.law.clone())) {
                    Ok(f) => {
                        let p = sibling(&index, &format!("density_t{}", g.t));
                        let rows = f.points(10.0 * d.sigma2().sqrt()).into_iter().map(|(v, fv)| (g.t, v, fv));
                        write_csv(&p, "t,v,f", rows)?;
                        file_name(&p)
                    }
                    Err(e) => {
                        log::warn!("no density at t = {}: {e}", g.t);
                        String::new()
                    }
                };
                entries.push((g.t, solver.to_string(), file_name(&cf_path), dens));
            }
            write_csv(&index, "t,method,cf_file,density_file", entries)?;
            return report_failures(&failures);
        }
        Command::Sample { datum, t, n, out, stats } => {
            let d = load_datum(datum, meta)?;
            let batch = sample_batch(&d, *t, *n, cli.seed)?;
            let path = out_path(cli, out);
            write_csv(&path, "v", batch.values.iter().map(|v| (v,)))?;
            if let Some(spec) = stats {
                let ms = parse_stats(spec)?;
                let res = weight_power_stats(*t, &ms, *n, cli.seed)?;
                let mut rows = Vec::new();
                for (m, (mean, se)) in ms.iter().zip(res) {
                    let expected = (-decay_exponent(*m)? * t).exp();
                    println!("m={m} mean={mean:.6} se={se:.2e} expected={expected:.6}");
                    rows.push((*m, *t, *n, mean, se, expected));
                }
                write_csv(&sibling(&path, "stats"), "m,t,n,mean,se,expected", rows)?;
            }
        }
        Command::Distance {
            datum,
            times,
            method,
            metric,
            out,
            grid,
        } => {
            let d = load_datum(datum, meta)?;
            let method = match method {
                MethodArg::Bobylev => Method::Bobylev,
                MethodArg::Wild => Method::Wild,
                MethodArg::Both => Method::Both,
            };
            let metrics = match metric {
                MetricArg::Tv => vec![Metric::Tv],
                MetricArg::SupCf => vec![Metric::SupCf],
                MetricArg::All => vec![Metric::Tv, Metric::SupCf],
            };
            let (rows, failures) = measure_distances(&d, times, method, &metrics, &grid.settings())?;
            write_csv(&out_path(cli, out), "t,metric,value,method,tol", &rows)?;
            return report_failures(&failures);
        }
        Command::VerifyLemma {
            lemma,
            datum,
            k,
            delta,
            trials,
            n_max,
            grid,
            out,
        } => {
            let d = load_datum(datum, meta)?;
            let setup = LemmaSetup::new(*lemma, &d, *k, *delta)?;
            let certs = lemma_suite(&setup, *trials, *n_max, cli.seed, *grid)?;
            let rows = certs.iter().map(|c| {
                let bytes: Vec<u8> = c.weights.iter().flat_map(|x| x.to_le_bytes()).collect();
                (c.weights.len(), sha256_hex(&bytes), c.window, c.max_violation, c.argmax_xi)
            });
            write_csv(&out_path(cli, out), "n,weights_sha256,window,max_violation,argmax_xi", rows)?;
            let violations = certs.iter().filter(|c| !c.holds()).count();
            println!("{lemma} on {}: {} trials, {violations} violations", d.name, certs.len());
        }
        Command::Rate { config } => {
            let (cfg, text) = load_experiment(config)?;
            meta.config = text.into_bytes();
            let series = run_experiment(&cfg)?;
            series.write_series_csv(&cli.out_dir.join("series.csv"))?;
            series.write_fit_csv(&cli.out_dir.join("fit.csv"))?;
            for f in &series.failures {
                eprintln!("warning: {f}");
            }
            if let Some(e) = &series.fit_error {
                eprintln!("warning: {e}");
            }
            let slope = series.fit.as_ref().map(|f| f.slope);
            println!(
                "{}: verdict {}, slope {}, predicted exponent {}",
                series.datum,
                series.verdict,
                slope.map_or("none".into(), |s| format!("{s:.4}")),
                series.predicted.exponent.map_or("none".into(), |p| format!("{p:.4}")),
            );
            if let Some(want) = cfg.expect {
                if want != series.verdict {
                    eprintln!("expected {want}, got {}", series.verdict);
                    return Ok(EXIT_MISMATCH);
                }
            }
        }
        Command::Demo => {
            let report = crate::demo::run_demo(&cli.out_dir, cli.seed)?;
            meta.config = report.as_bytes().to_vec();
            let failed = report.lines().filter(|l| l.contains("| FAIL |")).count();
            println!("demo: {failed} criteria failed; see {}", cli.out_dir.join("report.md").display());
            if failed > 0 {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn report_failures(failures: &[String]) -> Result<i32> {
    for f in failures {
        eprintln!("warning: {f}");
    }
    Ok(0)
}

/// `m=4,6` (or `4,6`) to `[4.0, 6.0]`.
fn parse_stats(spec: &str) -> Result<Vec<f64>> {
    let list = spec.trim().strip_prefix("m=").unwrap_or(spec.trim());
    list.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| KacError::Config(format!("bad --stats entry '{x}'")))
        })
        .collect()
}
