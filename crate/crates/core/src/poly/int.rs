//! Dense polynomials over ℤ, the exact workhorse behind root isolation and
//! extended-precision evaluation.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `c[i]` is the coefficient of `x^i`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntPoly {
    pub(crate) c: Vec<BigInt>,
}

/// Exact dyadic decomposition `x = m · 2^e` of a finite double.
pub(crate) fn dyadic(x: f64) -> (BigInt, i64) {
    assert!(x.is_finite(), "dyadic of non-finite value");
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, exp - 1075)
    };
    let tz = mant.trailing_zeros() as i64;
    (BigInt::from(sign * (mant >> tz) as i64), e + tz)
}

pub(crate) fn rational_from_f64(x: f64) -> BigRational {
    let (m, e) = dyadic(x);
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-e) as usize)
    }
}

/// Correctly rounded (to within one ulp) conversion of `num / den`.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let neg = (num.sign() == Sign::Minus) ^ (den.sign() == Sign::Minus);
    let n = num.abs();
    let d = den.abs();
    // Scale so the quotient carries 64+ significant bits.
    let shift = 66i64 + d.bits() as i64 - n.bits() as i64;
    let q = if shift >= 0 {
        (n << shift as usize) / &d
    } else {
        (n >> (-shift) as usize) / &d
    };
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let v = scale_pow2(qf, -shift);
    if neg {
        -v
    } else {
        v
    }
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl IntPoly {
    pub(crate) fn new(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Self { c }
    }

    /// Clear denominators: returns `(q, d)` with `p = q / d`, `d > 0`.
    pub(crate) fn from_rationals(coeffs: &[BigRational]) -> (Self, BigInt) {
        let mut den = BigInt::one();
        for q in coeffs {
            if !q.is_zero() {
                den = den.lcm(q.denom());
            }
        }
        let c = coeffs
            .iter()
            .map(|q| q.numer() * (&den / q.denom()))
            .collect();
        (Self::new(c), den)
    }

    pub(crate) fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub(crate) fn lead(&self) -> &BigInt {
        self.c.last().expect("nonzero polynomial")
    }

    pub(crate) fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for x in &self.c {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides out the content; the sign of the leading coefficient is kept.
    pub(crate) fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let g = self.content();
        if g.is_one() {
            return self.clone();
        }
        Self::new(self.c.iter().map(|x| x / &g).collect())
    }

    pub(crate) fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, x)| x * BigInt::from(i))
                .collect(),
        )
    }

    /// `p(x + a)`.
    pub(crate) fn taylor_shift(&self, a: &BigInt) -> Self {
        let mut c = self.c.clone();
        let n = c.len();
        if n < 2 || a.is_zero() {
            return self.clone();
        }
        if a.is_one() {
            for i in 0..n - 1 {
                for j in (i..n - 1).rev() {
                    let t = c[j + 1].clone();
                    c[j] += t;
                }
            }
        } else {
            for i in 0..n - 1 {
                for j in (i..n - 1).rev() {
                    let t = &c[j + 1] * a;
                    c[j] += t;
                }
            }
        }
        Self::new(c)
    }

    /// `p(b x)`.
    pub(crate) fn scale(&self, b: &BigInt) -> Self {
        let mut pow = BigInt::one();
        let mut c = Vec::with_capacity(self.c.len());
        for x in &self.c {
            c.push(x * &pow);
            pow *= b;
        }
        Self::new(c)
    }

    /// `2^{s·d} p(x / 2^s)` where `d` is the degree.
    pub(crate) fn shrink_pow2(&self, s: u64) -> Self {
        let d = match self.degree() {
            Some(d) => d as u64,
            None => return self.clone(),
        };
        Self::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, x)| x << ((d - i as u64) * s) as usize)
                .collect(),
        )
    }

    /// `x^d p(1/x)`.
    pub(crate) fn reversed(&self) -> Self {
        let mut c = self.c.clone();
        c.reverse();
        Self::new(c)
    }

    pub(crate) fn sign_variations(&self) -> usize {
        let mut last = Sign::NoSign;
        let mut v = 0;
        for x in &self.c {
            let s = x.sign();
            if s == Sign::NoSign {
                continue;
            }
            if last != Sign::NoSign && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    /// `2^{shift·d} p(num / 2^shift)` computed exactly.
    pub(crate) fn eval_dyadic(&self, num: &BigInt, shift: u64) -> BigInt {
        let d = match self.degree() {
            Some(d) => d,
            None => return BigInt::zero(),
        };
        let mut acc = self.c[d].clone();
        for i in (0..d).rev() {
            acc = acc * num + (&self.c[i] << ((d - i) as u64 * shift) as usize);
        }
        acc
    }

    /// Exact value at a double.
    pub(crate) fn eval_f64_exact(&self, t: f64) -> BigRational {
        let d = match self.degree() {
            Some(d) => d,
            None => return BigRational::zero(),
        };
        let (m, e) = dyadic(t);
        if e >= 0 {
            let x = m << e as usize;
            let mut acc = self.c[d].clone();
            for i in (0..d).rev() {
                acc = acc * &x + &self.c[i];
            }
            BigRational::from_integer(acc)
        } else {
            let s = (-e) as u64;
            let v = self.eval_dyadic(&m, s);
            BigRational::new(v, BigInt::one() << (s * d as u64) as usize)
        }
    }

    /// Sign of `p(t)` for a double `t`, exact.
    pub(crate) fn sign_at(&self, t: f64) -> Sign {
        let d = match self.degree() {
            Some(d) => d,
            None => return Sign::NoSign,
        };
        let (m, e) = dyadic(t);
        if e >= 0 {
            let x = m << e as usize;
            let mut acc = self.c[d].clone();
            for i in (0..d).rev() {
                acc = acc * &x + &self.c[i];
            }
            acc.sign()
        } else {
            self.eval_dyadic(&m, (-e) as u64).sign()
        }
    }

    fn to_rationals(&self) -> Vec<BigRational> {
        self.c
            .iter()
            .cloned()
            .map(BigRational::from_integer)
            .collect()
    }

    /// Pseudo-remainder `lc(b)^{deg a - deg b + 1} a mod b`.
    fn pseudo_rem(a: &Self, b: &Self) -> Self {
        let db = b.degree().expect("nonzero divisor");
        let lb = b.lead().clone();
        let mut r = a.c.clone();
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            for x in r.iter_mut() {
                *x *= &lb;
            }
            for (j, bj) in b.c.iter().enumerate() {
                r[dr - db + j] -= &lr * bj;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Self::new(r)
    }

    /// Greatest common divisor up to a constant factor (primitive PRS).
    pub(crate) fn gcd(a: &Self, b: &Self) -> Self {
        let mut a = a.primitive();
        let mut b = b.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = Self::pseudo_rem(&a, &b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    /// Exact quotient `a / b`, made primitive. `b` must divide `a` over ℚ.
    pub(crate) fn div_exact(a: &Self, b: &Self) -> Self {
        let num = a.to_rationals();
        let den = b.to_rationals();
        let db = den.len() - 1;
        let mut rem = num;
        let mut quo = vec![BigRational::zero(); rem.len().saturating_sub(db)];
        for k in (0..quo.len()).rev() {
            let q = &rem[k + db] / &den[db];
            for (j, dj) in den.iter().enumerate() {
                rem[k + j] -= &q * dj;
            }
            quo[k] = q;
        }
        let (q, _) = Self::from_rationals(&quo);
        q.primitive()
    }

    fn mod_prime(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        self.c
            .iter()
            .map(|x| x.mod_floor(&pb).to_u64().expect("reduced"))
            .collect()
    }

    /// Squarefree part. A modular gcd test settles the common case without
    /// exact gcd computation.
    pub(crate) fn squarefree(&self) -> Self {
        let d = match self.degree() {
            Some(d) if d >= 2 => d,
            _ => return self.primitive(),
        };
        let dp = self.derivative();
        for &p in &[2_305_843_009_213_693_951u64, 1_000_000_007, 998_244_353] {
            if (p as usize) <= d {
                continue;
            }
            let a = self.mod_prime(p);
            if a[d] == 0 {
                continue;
            }
            let b = dp.mod_prime(p);
            if gcd_degree_mod(a, b, p) == 0 {
                return self.primitive();
            }
        }
        let g = Self::gcd(self, &dp);
        if g.degree() == Some(0) {
            self.primitive()
        } else {
            Self::div_exact(self, &g)
        }
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let db = b.len() - 1;
        let inv = powmod(b[db], p - 2, p);
        while a.len() > db {
            let da = a.len() - 1;
            let q = mulmod(a[da], inv, p);
            for j in 0..=db {
                let t = mulmod(q, b[j], p);
                a[da - db + j] = (a[da - db + j] + p - t) % p;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn dyadic_roundtrip() {
        for &x in &[1.0, -0.375, 3.0e-300, 1.5e300, 5e-324, 0.1] {
            let q = rational_from_f64(x);
            assert_eq!(ratio_to_f64(q.numer(), q.denom()), x);
        }
    }

    #[test]
    fn taylor_shift_matches_expansion() {
        // (x+2)^2 = x^2 + 4x + 4
        let p = ip(&[0, 0, 1]).taylor_shift(&BigInt::from(2));
        assert_eq!(p, ip(&[4, 4, 1]));
    }

    #[test]
    fn squarefree_removes_repeated_factor() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let p = ip(&[2, -3, 0, 1]);
        let s = p.squarefree();
        // (x-1)(x+2) = x^2 + x - 2 up to sign
        let expect = ip(&[-2, 1, 1]);
        assert!(s == expect || s == ip(&[2, -1, -1]), "{s:?}");
    }

    #[test]
    fn squarefree_keeps_squarefree() {
        let p = ip(&[-2, 0, 1]);
        assert_eq!(p.squarefree(), p);
    }

    #[test]
    fn eval_dyadic_exact() {
        // p = x^2 - 2 at 3/2: 9/4 - 2 = 1/4 -> times 2^{2}= 1
        let p = ip(&[-2, 0, 1]);
        assert_eq!(p.eval_dyadic(&BigInt::from(3), 1), BigInt::from(1));
    }
}
