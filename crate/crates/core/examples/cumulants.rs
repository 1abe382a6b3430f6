//! Moments to cumulants and back, for the uniform law on [-sqrt3, sqrt3].

use kacwild::cumulants::{cumulants_to_moments, moments_to_cumulants};
use kacwild::datum::InitialDatum;

fn main() -> kacwild::Result<()> {
    let d = InitialDatum::uniform_unit();
    let k = moments_to_cumulants(&d.moments, 10)?;
    let back = cumulants_to_moments(&k, 10)?;
    for r in 1..=10 {
        println!("{r:>2}  m = {:>14.8}  kappa = {:>14.8}  |m - m'| = {:.1e}", d.moments.get(r), k.get(r), (back.get(r) - d.moments.get(r)).abs());
    }
    Ok(())
}
