//! Wild sum against the Bobylev ODE on the same grid.

use kacwild::datum::InitialDatum;
use kacwild::spectral::{bobylev_trajectory, wild_series, GridParams, SolverOptions, WildOptions};

fn main() -> kacwild::Result<()> {
    let d = InitialDatum::laplace(0.5f64.sqrt())?;
    let grid = GridParams::new(1 << 9, 20.0)?;
    let times = [0.5, 1.0, 2.0];
    let (w, report) = wild_series(&d, &times, grid, &WildOptions::default())?;
    let (b, _) = bobylev_trajectory(&d, &times, &SolverOptions::for_datum(&d).with_grid(grid))?;
    for (w, b) in w.iter().zip(&b) {
        let gap = w
            .half_values()
            .iter()
            .zip(b.half_values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        println!("t = {}  sup |wild - bobylev| = {gap:.2e}", w.t);
    }
    println!("{} terms, {} products, tail weight {:.1e}", report.terms, report.products, report.tail_weight);
    Ok(())
}
