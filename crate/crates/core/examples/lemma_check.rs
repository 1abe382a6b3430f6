//! Random weight arrays checked against the Edgeworth-type bounds.

use kacwild::datum::make_zero_kurtosis_mixture;
use kacwild::edgeworth::{lemma_suite, LemmaId, LemmaSetup};

fn main() -> kacwild::Result<()> {
    let base = make_zero_kurtosis_mixture();
    for (lemma, k, delta) in [(LemmaId::L1Punt4, 4, 0.0), (LemmaId::L2Punt, 4, 1.0), (LemmaId::L2Der, 6, 0.0)] {
        let setup = LemmaSetup::new(lemma, &base, k, delta)?;
        let certs = lemma_suite(&setup, 50, 8, 3, 2001)?;
        let worst = certs.iter().map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
        let held = certs.iter().filter(|c| c.holds()).count();
        println!("{lemma} k={k} delta={delta}: {held}/{} hold, worst LHS - RHS = {worst:.3e}", certs.len());
    }
    Ok(())
}
