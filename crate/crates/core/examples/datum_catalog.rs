//! The built-in initial data and the rate each is predicted to show.

use kacwild::datum::catalog;
use kacwild::rate::predicted_rate;

fn main() -> kacwild::Result<()> {
    for d in catalog() {
        let p = predicted_rate(&d, None);
        println!(
            "{:<18} sigma^2 = {:.4}  kappa4 = {:>9.5}  kappa6 = {:>9.5}  rate {:?} ({:?})",
            d.name,
            d.sigma2(),
            d.cumulants.get(4),
            d.cumulants.get(6),
            p.exponent,
            p.kind
        );
    }
    Ok(())
}
