//! Fixed-point big-integer arithmetic for phase reduction modulo 2π.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `floor(atan(1/x) · 2^bits)` up to a few units in the last place.
fn atan_inv(x: u32, bits: u64) -> BigInt {
    let one = BigInt::one() << bits as usize;
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = &one / BigInt::from(x);
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power = &power / &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

/// `π · 2^bits`, rounded down, accurate in every bit.
pub(crate) fn pi_fixed(bits: u64) -> BigInt {
    static CACHE: OnceLock<Mutex<(u64, BigInt)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((0, BigInt::zero())));
    let mut guard = cache.lock().expect("pi cache poisoned");
    if guard.0 < bits {
        let guard_bits = 32;
        let p = bits.max(256) + guard_bits;
        // Machin: π = 16 atan(1/5) − 4 atan(1/239)
        let v = atan_inv(5, p) * 16 - atan_inv(239, p) * 4;
        *guard = (p - guard_bits, v >> guard_bits as usize);
    }
    let (have, ref v) = *guard;
    v >> (have - bits) as usize
}

/// `q mod 2π` in `[0, 2π)`, using `bits` fractional bits beyond the integer
/// part of `q`.
pub(crate) fn reduce_mod_two_pi(q: &BigRational, bits: u64) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let int_bits = {
        let n = q.numer().abs().bits() as i64;
        let d = q.denom().bits() as i64;
        (n - d + 2).max(0) as u64
    };
    let p = bits + int_bits + 16;
    let scaled = (q.numer() << p as usize).div_floor(q.denom());
    let two_pi = pi_fixed(p) << 1usize;
    let r = scaled.mod_floor(&two_pi);
    // r < 2π · 2^p; keep the top 64 bits for the conversion.
    let shift = p.saturating_sub(60);
    let top = (r >> shift as usize).to_f64().expect("small");
    top * 2f64.powi(-((p - shift) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let p = pi_fixed(200);
        let approx = (p >> 149usize).to_f64().unwrap() / 2f64.powi(51);
        assert_eq!(approx, std::f64::consts::PI);
    }

    #[test]
    fn reduce_huge_multiple() {
        // Reference values from a 80-digit mpmath computation.
        let q = BigRational::from_integer(BigInt::from(10).pow(30));
        let r = reduce_mod_two_pi(&q, 128);
        assert!((r - 3.231_831_977_487_846_3).abs() < 1e-15);
        let q = BigRational::from_integer(BigInt::from(3).pow(101));
        let r = reduce_mod_two_pi(&q, 64);
        assert!((r - 5.411_611_992_174_888_8).abs() < 1e-15);
    }

    #[test]
    fn reduce_small() {
        let q = BigRational::new(BigInt::from(7), BigInt::from(1));
        let r = reduce_mod_two_pi(&q, 128);
        assert!((r - (7.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let q = BigRational::new(BigInt::from(-1), BigInt::from(2));
        let r = reduce_mod_two_pi(&q, 128);
        assert!((r - (2.0 * std::f64::consts::PI - 0.5)).abs() < 1e-15);
    }
}
