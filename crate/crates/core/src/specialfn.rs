//! Gamma and Beta functions on the positive reals.
//!
//! Both are built on a Lanczos approximation (g = 7, nine terms), which is
//! accurate to a few ulps over the range the solver needs.

use std::f64::consts::PI;

use crate::error::DomainError;

const LANCZOS_G: f64 = 7.0;

const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln(2π)/2
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this, Γ(x) overflows an f64.
const GAMMA_MAX: f64 = 171.624_376_956_302_7;

fn check_arg(name: &'static str, x: f64) -> Result<(), DomainError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(DomainError::new(name, format!("argument must be positive and finite, got {x}")))
    }
}

/// Lanczos series A_g(z) for z = x - 1.
fn lanczos_sum(z: f64) -> f64 {
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    sum
}

/// Euler's Gamma function for `x > 0`.
pub fn gamma(x: f64) -> Result<f64, DomainError> {
    check_arg("gamma", x)?;
    if x > GAMMA_MAX {
        return Err(DomainError::new("gamma", format!("Γ({x}) overflows f64")));
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return Ok(PI / ((PI * x).sin() * gamma_unchecked(1.0 - x)));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split t^(z+1/2) so large arguments do not overflow before e^-t is applied.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, DomainError> {
    check_arg("ln_gamma", x)?;
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI.ln() - s.ln() - ln_gamma_unchecked(1.0 - x));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Euler's Beta function 𝔅(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta(p: f64, q: f64) -> Result<f64, DomainError> {
    check_arg("beta", p)?;
    check_arg("beta", q)?;
    Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_reference_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        // Γ(7/2) = √π·6!/(2^6·3!) = 15√π/8
        assert!(rel(gamma(3.5).unwrap(), 15.0 * PI.sqrt() / 8.0) < 1e-14);
        assert!(rel(gamma(3.5).unwrap(), 3.323_350_970_447_842_6) < 1e-14);
    }

    #[test]
    fn gamma_half_integers_match_factorial_identity() {
        let mut fact = [1.0f64; 21];
        for i in 1..21 {
            fact[i] = fact[i - 1] * i as f64;
        }
        for n in 0..10usize {
            let expected = PI.sqrt() * fact[2 * n] / (4f64.powi(n as i32) * fact[n]);
            assert!(rel(gamma(n as f64 + 0.5).unwrap(), expected) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gamma_small_and_large_arguments() {
        // Γ(x) ~ 1/x - γ_E near zero
        let x = 1e-8;
        assert!(rel(gamma(x).unwrap(), 1.0 / x - 0.577_215_664_901_532_9) < 1e-12);
        // Γ(50) = 49!
        assert!(rel(gamma(50.0).unwrap(), 6.082_818_640_342_675e62) < 1e-13);
        assert!(rel(ln_gamma(50.0).unwrap(), 144.565_743_946_344_9) < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_and_nan() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(gamma(f64::NAN).is_err());
        assert!(gamma(f64::INFINITY).is_err());
        assert!(gamma(200.0).is_err());
        assert!(ln_gamma(0.0).is_err());
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
    }

    #[test]
    fn beta_reference_values() {
        assert!(rel(beta(1.0, 4.0).unwrap(), 0.25) < 1e-14);
        assert!(rel(beta(2.0, 3.0).unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(rel(beta(3.0, 2.0).unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(rel(beta(0.5, 0.5).unwrap(), PI) < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn gamma_recursion(x in 1e-3f64..20.0) {
            let lhs = gamma(x + 1.0).unwrap();
            proptest::prop_assert!(rel(x * gamma(x).unwrap(), lhs) <= 1e-10);
        }

        #[test]
        fn beta_recursions(p in 1e-2f64..10.0, q in 1e-2f64..10.0) {
            let b = beta(p, q).unwrap();
            proptest::prop_assert!(rel(beta(q, p).unwrap(), b) <= 1e-10);
            proptest::prop_assert!(rel(beta(p, q + 1.0).unwrap() + beta(p + 1.0, q).unwrap(), b) <= 1e-10);
            proptest::prop_assert!(rel(beta(p, q).unwrap() * p / (p + q), beta(p + 1.0, q).unwrap()) <= 1e-10);
        }

        #[test]
        fn ln_gamma_matches_gamma(x in 1e-2f64..30.0) {
            proptest::prop_assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().ln()).abs() <= 1e-11 * (1.0 + ln_gamma(x).unwrap().abs()));
        }
    }

    #[test]
    fn factorials_are_exact() {
        let mut fact = 1.0;
        for n in 1..=15u32 {
            fact *= f64::from(n);
            assert!(rel(gamma(f64::from(n) + 1.0).unwrap(), fact) <= 1e-12, "{n}!");
        }
    }
}
