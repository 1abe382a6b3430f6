use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kacwild(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kacwild"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn alpha_prints_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = kacwild(dir.path(), &["alpha", "--s", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "4,0.375,0.25"), "{}", stdout(&o));
    let meta = fs::read_to_string(dir.path().join("run.meta")).unwrap();
    assert!(meta.contains("exit_code"), "{meta}");
    assert!(meta.contains("config_sha256"), "{meta}");
}

#[test]
fn usage_and_config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kacwild(dir.path(), &["alpha", "--bogus"]).status.code(), Some(1));
    assert_eq!(kacwild(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let missing = dir.path().join("nope.toml");
    let o = kacwild(dir.path(), &["rate", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(kacwild(dir.path(), &["solve", "--datum", "cauchy", "--t", "1"]).status.code(), Some(1));
    assert_eq!(kacwild(dir.path(), &["--threads", "0", "alpha", "--s", "2"]).status.code(), Some(1));
}

#[test]
fn rate_expectation_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.toml");
    fs::write(
        &cfg,
        "[datum]\nkind = \"gaussian\"\n\n[experiment]\nt_end = 3\nt_step = 0.5\nfit_lo = 1\nfit_hi = 3\nexpect = \"T1-sharp\"\n\n[solver]\ngrid_n = 1024\n",
    )
    .unwrap();
    let o = kacwild(dir.path(), &["rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("P4-exact"));
    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(series.starts_with("t,metric,value,method,tol\n"));
    assert!(dir.path().join("fit.csv").exists());
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let a = kacwild(
            dir.path(),
            &["--threads", threads, "--seed", "7", "sample", "--datum", "uniform", "--t", "1", "--n", "2000", "--stats", "m=4,6"],
        );
        assert_eq!(a.status.code(), Some(0));
        let b = kacwild(
            dir.path(),
            &["--threads", threads, "distance", "--datum", "uniform", "--t", "0.5,1", "--grid-n", "2048"],
        );
        assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
        ["samples.csv", "samples_stats.csv", "distance.csv"].map(|f| fs::read(dir.path().join(f)).unwrap())
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    assert_eq!(one, run("1"));
}

#[test]
fn lemma_and_cumulant_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = kacwild(
        dir.path(),
        &["verify-lemma", "--lemma", "l2", "--datum", "uniform", "--k", "6", "--trials", "10", "--grid", "2001"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(dir.path().join("lemma.csv")).unwrap();
    assert_eq!(rows.lines().count(), 11);
    assert!(rows.starts_with("n,weights_sha256,window,max_violation,argmax_xi"));

    let o = kacwild(dir.path(), &["cumulants", "--moments", "0,1,0,3"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("cumulants.csv")).unwrap();
    assert!(csv.starts_with("order,cumulant\n"), "{csv}");
}
