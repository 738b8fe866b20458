//! Special functions: log-gamma, log-beta, sine integral, and logarithms of
//! big integers and rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::quad::{integrate, AdaptiveOptions};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs a positive argument");
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x > 20.0 {
        return stirling_ln_gamma(x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number series; six terms are ample for x > 20.
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2
                                * (1.0 / 1680.0
                                    - inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360_360.0)))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Sine integral `Si(x) = ∫_0^x sin(t)/t dt`.
///
/// Power series for `|x| ≤ 4`, adaptive quadrature beyond.
pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.abs() <= 4.0 {
        let x2 = x * x;
        let mut term = x; // x^{2k+1}/(2k+1)!
        let mut sum = 0.0;
        let mut k = 0u32;
        loop {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() {
                break;
            }
            k += 1;
            term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        return sum;
    }
    let f = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    let head = sine_integral(4.0f64.copysign(x));
    head + integrate(&f, 4.0f64.copysign(x), x, AdaptiveOptions::absolute(1e-14))
        .expect("smooth integrand")
        .value
}

/// Natural logarithm of a positive big integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive(), "ln of non-positive integer");
    let bits = n.bits();
    if bits <= 1000 {
        let v: f64 = num_traits::ToPrimitive::to_f64(n).expect("fits");
        return v.ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    let v: f64 = num_traits::ToPrimitive::to_f64(&top).expect("64 bits fit");
    v.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of `|q|` for a nonzero rational.
pub fn ln_abs_rational(q: &BigRational) -> f64 {
    assert!(!q.is_zero());
    ln_bigint(&q.numer().abs()) - ln_bigint(&q.denom().abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_integers() {
        for n in 1..30u32 {
            let fact: f64 = (1..n).map(|k| k as f64).product();
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
    }

    #[test]
    fn gamma_half() {
        let v = ln_gamma(0.5);
        assert!((v - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_half_five_matches_rational() {
        // B(1/2, 5) = 256/315
        assert!((ln_beta(0.5, 5.0).exp() - 256.0 / 315.0).abs() < 1e-14);
    }

    #[test]
    fn sine_integral_one() {
        assert!((sine_integral(1.0) - 0.946_083_070_367_183_1).abs() < 1e-15);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-12);
    }

    #[test]
    fn ln_of_huge_integer() {
        let n = BigInt::from(3u32).pow(2000);
        assert!((ln_bigint(&n) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }
}
