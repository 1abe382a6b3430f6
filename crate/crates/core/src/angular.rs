//! Angular moments `alpha_s = (1/2pi) int_0^{2pi} |sin theta|^s d theta` and the
//! decay exponents `1 - 2 alpha_s` they induce.

use crate::error::{domain, Result};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Largest integer order for which the exact binomial form is used.
const EXACT_MAX: u32 = 50;

/// `alpha_s` for `s >= 0`.
///
/// Integer orders use the Wallis form `C(2m, m) / 4^m` (even) or its odd
/// companion, so `alpha(4) == 0.375` holds bit for bit. Other orders go
/// through log-gamma.
pub fn alpha(s: f64) -> Result<f64> {
    if !s.is_finite() || s < 0.0 {
        return domain(format!("angular order must be finite and >= 0, got {s}"));
    }
    if s.fract() == 0.0 && s <= EXACT_MAX as f64 {
        return Ok(alpha_integer(s as u32));
    }
    let lg = ln_gamma((s + 1.0) / 2.0) - ln_gamma(s / 2.0 + 1.0);
    Ok(lg.exp() / PI.sqrt())
}

fn alpha_integer(s: u32) -> f64 {
    let m = s / 2;
    let central = binomial(2 * m, m);
    let pow4 = 4f64.powi(m as i32);
    if s % 2 == 0 {
        central / pow4
    } else {
        (2.0 / PI) * pow4 / ((2 * m + 1) as f64 * central)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Exponent `1 - 2 alpha_s` of the rate `exp(-(1 - 2 alpha_s) t)`.
pub fn decay_exponent(s: f64) -> Result<f64> {
    Ok(1.0 - 2.0 * alpha(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::adaptive_simpson;
    use proptest::prelude::*;

    // Independent oracle: integrate |sin|^s over a quarter period.
    fn alpha_quadrature(s: f64) -> f64 {
        let f = |th: f64| th.sin().powf(s);
        2.0 / PI * adaptive_simpson(&f, 0.0, PI / 2.0, 1e-13)
    }

    #[test]
    fn exact_values() {
        assert_eq!(alpha(0.0).unwrap(), 1.0);
        assert_eq!(alpha(2.0).unwrap(), 0.5);
        assert_eq!(alpha(4.0).unwrap(), 0.375);
        assert_eq!(alpha(6.0).unwrap(), 0.3125);
        assert_eq!(decay_exponent(4.0).unwrap(), 0.25);
        assert!((alpha(5.0).unwrap() - 16.0 / (15.0 * PI)).abs() < 1e-15);
        assert!((alpha(1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn matches_quadrature() {
        let mut s = 0.0;
        while s <= 12.0 {
            let a = alpha(s).unwrap();
            assert!((a - alpha_quadrature(s)).abs() < 1e-10, "s = {s}");
            s += 0.25;
        }
    }

    #[test]
    fn integer_branch_agrees_with_gamma_branch() {
        for s in 0..=EXACT_MAX {
            let sf = s as f64;
            let lg = (ln_gamma((sf + 1.0) / 2.0) - ln_gamma(sf / 2.0 + 1.0)).exp() / PI.sqrt();
            assert!((alpha(sf).unwrap() - lg).abs() < 1e-12 * lg, "s = {s}");
        }
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(alpha(-1.0).is_err());
        assert!(alpha(f64::NAN).is_err());
        assert!(alpha(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn strictly_decreasing(s1 in 0.0f64..40.0, gap in 1e-4f64..10.0) {
            prop_assert!(alpha(s1).unwrap() > alpha(s1 + gap).unwrap());
        }

        #[test]
        fn alpha_two_is_a_half_and_exponents_order(s in 2.0f64..40.0) {
            let e = decay_exponent(s).unwrap();
            prop_assert!(e >= 0.0 && e < 1.0);
        }
    }
}
