//! McKean trees: weight sums and samples of V(t).

use kacwild::angular::decay_exponent;
use kacwild::datum::InitialDatum;
use kacwild::mckean::{max_sphere_defect, sample_batch, weight_power_stats};

fn main() -> kacwild::Result<()> {
    let t = 1.0;
    println!("max |sum pi^2 - 1| over 10^4 trees: {:.1e}", max_sphere_defect(t, 10_000, 1)?);
    let ms = [3.0, 4.0, 6.0];
    for (m, (mean, se)) in ms.iter().zip(weight_power_stats(t, &ms, 20_000, 1)?) {
        let want = (-decay_exponent(*m)? * t).exp();
        println!("m = {m}  mean {mean:.5} +- {se:.5}  expected {want:.5}");
    }
    let batch = sample_batch(&InitialDatum::uniform_unit(), t, 20_000, 2)?;
    let (mean, se) = batch.mean_and_se();
    println!("V(1): mean {mean:.4} +- {se:.4}, E V^2 = {:.4}", batch.second_moment());
    Ok(())
}
