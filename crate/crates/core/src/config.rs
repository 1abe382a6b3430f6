//! Datum and experiment files.
//!
//! Files are TOML limited to `key = value` lines under at most one level of
//! `[section]` headers; `docs/config.md` lists the keys.

use crate::datum::{
    catalog, make_odd_perturbed_gaussian, make_zero_kurtosis_mixture, InitialDatum, Law, Table,
};
use crate::error::{KacError, Result};
use crate::rate::{time_grid, ExperimentConfig, Method, Metric, SolverSettings};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn one() -> f64 {
    1.0
}
fn sqrt3() -> f64 {
    3f64.sqrt()
}
fn sqrt_half() -> f64 {
    0.5f64.sqrt()
}

/// A datum by kind and parameters. Defaults give unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Uniform on `[-a, a]`.
    Uniform {
        #[serde(default = "sqrt3")]
        a: f64,
    },
    Laplace {
        #[serde(default = "sqrt_half")]
        b: f64,
    },
    TwoPoint {
        #[serde(default = "one")]
        c: f64,
    },
    #[serde(alias = "mixture-zero-k4")]
    MixtureZeroK4,
    OddPerturbed {
        #[serde(default = "one")]
        sigma: f64,
        epsilon: f64,
    },
    /// Two-column `v,f` CSV; relative paths resolve against the config file.
    Table { path: PathBuf },
}

impl DatumSpec {
    pub fn build(&self) -> Result<InitialDatum> {
        match self {
            DatumSpec::Gaussian { sigma } => InitialDatum::gaussian(*sigma),
            DatumSpec::Uniform { a } => InitialDatum::uniform(*a),
            DatumSpec::Laplace { b } => InitialDatum::laplace(*b),
            DatumSpec::TwoPoint { c } => InitialDatum::two_point(*c),
            DatumSpec::MixtureZeroK4 => Ok(make_zero_kurtosis_mixture()),
            DatumSpec::OddPerturbed { sigma, epsilon } => {
                Ok(make_odd_perturbed_gaussian(*sigma, *epsilon)?.into_datum())
            }
            DatumSpec::Table { path } => InitialDatum::from_law("table", Law::Table(Table::from_csv(path)?), None),
        }
    }

    /// Unit-variance catalog entries by name (`gaussian`, `uniform`,
    /// `laplace`, `two-point`, `mixture-zero-k4`, `odd-perturbed`).
    pub fn named(name: &str) -> Option<Self> {
        let spec = match name.replace('-', "_").as_str() {
            "gaussian" => DatumSpec::Gaussian { sigma: 1.0 },
            "uniform" => DatumSpec::Uniform { a: sqrt3() },
            "laplace" => DatumSpec::Laplace { b: sqrt_half() },
            "two_point" => DatumSpec::TwoPoint { c: 1.0 },
            "mixture_zero_k4" => DatumSpec::MixtureZeroK4,
            "odd_perturbed" => DatumSpec::OddPerturbed {
                sigma: 1.0,
                epsilon: 0.3,
            },
            _ => return None,
        };
        Some(spec)
    }

    /// Parses the `[datum]` section of a config text. Other sections are
    /// ignored, so an experiment file also serves as a datum file.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e: toml::de::Error| KacError::Config(e.to_string()))?;
        let datum = table
            .remove("datum")
            .ok_or_else(|| KacError::Config("missing [datum] section".into()))?;
        let spec: DatumSpec = datum.try_into().map_err(|e: toml::de::Error| KacError::Config(e.to_string()))?;
        Ok(spec.rebased(base_dir))
    }

    fn rebased(self, base_dir: Option<&Path>) -> Self {
        match (self, base_dir) {
            (DatumSpec::Table { path }, Some(dir)) if path.is_relative() => DatumSpec::Table { path: dir.join(path) },
            (s, _) => s,
        }
    }
}

/// Reads a file with `std::fs`, mapping a missing file to a config error.
pub fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| KacError::Config(format!("{}: {e}", path.display())))
}

/// A datum argument: a config file path, or a catalog name when no such
/// file exists. Returns the datum and the text that identifies it.
pub fn resolve_datum(arg: &str) -> Result<(DatumSpec, String)> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(s) = DatumSpec::named(arg) {
            return Ok((s, arg.to_string()));
        }
    }
    let text = read_config(path)?;
    Ok((DatumSpec::from_toml(&text, path.parent())?, text))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    times: Option<Vec<f64>>,
    t_end: Option<f64>,
    t_step: Option<f64>,
    #[serde(default = "default_method")]
    method: Method,
    #[serde(default = "default_metrics")]
    metrics: Vec<Metric>,
    #[serde(default = "default_fit_lo")]
    fit_lo: f64,
    #[serde(default = "default_fit_hi")]
    fit_hi: f64,
    delta: Option<f64>,
    #[serde(default)]
    seed: u64,
    expect: Option<String>,
}

fn default_method() -> Method {
    Method::Bobylev
}
fn default_metrics() -> Vec<Metric> {
    vec![Metric::Tv, Metric::SupCf]
}
fn default_fit_lo() -> f64 {
    3.0
}
fn default_fit_hi() -> f64 {
    10.0
}

impl Default for ExperimentSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    datum: toml::Value,
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    solver: SolverSettings,
}

/// Parses an experiment file and validates the result.
pub fn parse_experiment(text: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let cfg_err = |e: toml::de::Error| KacError::Config(e.to_string());
    let file: ExperimentFile = toml::from_str(text).map_err(cfg_err)?;
    let datum: DatumSpec = file.datum.try_into().map_err(cfg_err)?;
    let e = file.experiment;
    let times = match (e.times, e.t_end, e.t_step) {
        (Some(t), None, None) => t,
        (None, end, step) => time_grid(end.unwrap_or(10.0), step.unwrap_or(0.5)),
        _ => return Err(KacError::Config("give either times or t_end/t_step, not both".into())),
    };
    if let Some(s) = e.t_step {
        if !(s > 0.0) {
            return Err(KacError::Config("t_step must be positive".into()));
        }
    }
    let cfg = ExperimentConfig {
        datum: datum.rebased(base_dir),
        times,
        method: e.method,
        metrics: e.metrics,
        fit_window: (e.fit_lo, e.fit_hi),
        delta: e.delta,
        solver: file.solver,
        seed: e.seed,
        expect: e.expect.as_deref().map(str::parse).transpose()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_experiment(path: &Path) -> Result<(ExperimentConfig, String)> {
    let text = read_config(path)?;
    Ok((parse_experiment(&text, path.parent())?, text))
}

/// Names accepted by [`DatumSpec::named`], in catalog order.
pub fn catalog_names() -> Vec<String> {
    catalog().into_iter().map(|d| d.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::Verdict;

    #[test]
    fn datum_sections() {
        let s = DatumSpec::from_toml("[datum]\nkind = \"uniform\"\n", None).unwrap();
        assert_eq!(s, DatumSpec::Uniform { a: 3f64.sqrt() });
        let s = DatumSpec::from_toml("[datum]\nkind = \"odd_perturbed\"\nepsilon = 0.2\n", None).unwrap();
        assert_eq!(s, DatumSpec::OddPerturbed { sigma: 1.0, epsilon: 0.2 });
        let s = DatumSpec::from_toml("[datum]\nkind = \"laplace\"\nb = 2\n", None).unwrap();
        assert_eq!(s, DatumSpec::Laplace { b: 2.0 });
        for bad in [
            "kind = \"uniform\"",
            "[datum]\nkind = \"cauchy\"",
            "[datum]\nkind = \"uniform\"\nb = 1.0",
            "[datum]\nkind = \"odd_perturbed\"",
            "[datum\nkind = 1",
        ] {
            assert!(matches!(DatumSpec::from_toml(bad, None), Err(KacError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn catalog_names_resolve() {
        for name in catalog_names() {
            let d = DatumSpec::named(&name).unwrap().build().unwrap();
            assert_eq!(d.name, name);
        }
        assert!(DatumSpec::named("cauchy").is_none());
        assert!(matches!(resolve_datum("no/such/file.toml"), Err(KacError::Config(_))));
    }

    #[test]
    fn table_paths_are_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("f.csv"), "v,f\n-1,0\n0,1\n1,0\n").unwrap();
        let cfg = dir.path().join("d.toml");
        std::fs::write(&cfg, "[datum]\nkind = \"table\"\npath = \"f.csv\"\n").unwrap();
        let (spec, _) = resolve_datum(cfg.to_str().unwrap()).unwrap();
        let d = spec.build().unwrap();
        assert!(d.symmetric);
        assert!((d.sigma2() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn experiment_files() {
        let text = "[datum]\nkind = \"uniform\"\n\n[experiment]\nt_end = 10\nt_step = 1\nexpect = \"T1-sharp\"\n\n[solver]\ngrid_n = 4096\n";
        let c = parse_experiment(text, None).unwrap();
        assert_eq!(c.times.len(), 11);
        assert_eq!(c.expect, Some(Verdict::T1Sharp));
        assert_eq!(c.solver.grid_n, Some(4096));
        assert_eq!(c.fit_window, (3.0, 10.0));
        assert_eq!(c.metrics, vec![Metric::Tv, Metric::SupCf]);

        let c = parse_experiment("[datum]\nkind = \"gaussian\"\n[experiment]\ntimes = [0, 1, 2]\nfit_lo = 0\nfit_hi = 2\nmetrics = [\"sup_cf\"]\nmethod = \"wild\"\n", None).unwrap();
        assert_eq!(c.times, vec![0.0, 1.0, 2.0]);
        assert_eq!(c.method, Method::Wild);

        for bad in [
            "[datum]\nkind = \"uniform\"\n[experiment]\nfoo = 1\n",
            "[datum]\nkind = \"uniform\"\n[solver]\ndt = \"x\"\n",
            "[datum]\nkind = \"uniform\"\n[experiment]\nexpect = \"T9\"\n",
            "[datum]\nkind = \"uniform\"\n[experiment]\nt_end = 2\n",
            "[datum]\nkind = \"uniform\"\n[extra]\na = 1\n",
        ] {
            assert!(matches!(parse_experiment(bad, None), Err(KacError::Config(_))), "{bad}");
        }
    }
}
