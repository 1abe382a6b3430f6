//! A full decay experiment on the uniform datum: distances, fit, verdict.
//! Takes about half a minute on one core in release mode.

use kacwild::config::DatumSpec;
use kacwild::rate::{run_experiment, ExperimentConfig};

fn main() -> kacwild::Result<()> {
    let cfg = ExperimentConfig::new(DatumSpec::named("uniform").unwrap());
    let s = run_experiment(&cfg)?;
    for r in &s.rows {
        println!("{:>5} {:>7} {:>8} {:.4e}", r.t, r.metric, r.method, r.value);
    }
    if let Some(f) = &s.fit {
        println!("slope {:.4}  residual {:.2e}  liminf d e^(t/4) {:.4}", f.slope, f.residual, f.compensated_liminf);
    }
    println!("predicted {:?}: {}", s.predicted.exponent, s.predicted.rationale);
    println!("verdict {}", s.verdict);
    Ok(())
}
