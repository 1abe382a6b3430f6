//! Angular moments and the decay exponents they induce.

use kacwild::angular::{alpha, decay_exponent};

fn main() -> kacwild::Result<()> {
    println!("{:>5} {:>12} {:>12}", "s", "alpha", "1-2alpha");
    for s in [2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0] {
        println!("{s:>5} {:>12.8} {:>12.8}", alpha(s)?, decay_exponent(s)?);
    }
    Ok(())
}
