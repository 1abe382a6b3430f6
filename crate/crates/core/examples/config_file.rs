//! Parse an experiment file and run it.

use kacwild::config::parse_experiment;
use kacwild::rate::run_experiment;

const TEXT: &str = r#"
[datum]
kind = "odd_perturbed"
epsilon = 0.2

[experiment]
t_end = 4
t_step = 0.5
fit_lo = 1
fit_hi = 4
metrics = ["tv"]
expect = "P4-exact"

[solver]
grid_n = 2048
"#;

fn main() -> kacwild::Result<()> {
    let cfg = parse_experiment(TEXT, None)?;
    let s = run_experiment(&cfg)?;
    let slope = s.fit.as_ref().map(|f| f.slope);
    println!("slope {slope:?}, verdict {} (expected {:?})", s.verdict, cfg.expect);
    Ok(())
}
