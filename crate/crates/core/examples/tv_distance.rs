//! Density inversion and total variation to the Maxwellian.

use kacwild::datum::InitialDatum;
use kacwild::spectral::{bobylev_trajectory, invert_with, tv_distance, InversionOptions, SolverOptions};

fn main() -> kacwild::Result<()> {
    let d = InitialDatum::uniform_unit();
    let times = [0.0, 1.0, 2.0, 4.0];
    let (snaps, _) = bobylev_trajectory(&d, &times, &SolverOptions::for_datum(&d))?;
    for s in &snaps {
        let f = invert_with(s, &InversionOptions::subtract_leading(d.law.clone()))?;
        println!("t = {}  TV = {:.6}  f(0) = {:.6}", s.t, tv_distance(&f, d.sigma2().sqrt())?, f.at(0.0));
    }
    Ok(())
}
