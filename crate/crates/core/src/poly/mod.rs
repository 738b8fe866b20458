//! Dense univariate real polynomials with exact-rational or double
//! coefficients.
//!
//! Construction-time arithmetic runs in exact rationals. Runtime evaluation
//! uses compensated Horner in double precision, or exact evaluation followed
//! by a single rounding. Real roots are isolated exactly (Descartes
//! bisection over ℤ[x]) and refined by exact-sign bisection.

mod fixed;
pub(crate) mod int;
pub mod json;
mod roots;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use roots::{IsolatedRoot, RootList};

use int::{dyadic, ratio_to_f64, rational_from_f64, IntPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed polynomial descriptor: {0}")]
    Descriptor(String),
}

/// Coefficient storage; index `j` holds the coefficient of `t^j`.
#[derive(Debug, Clone)]
pub enum Coeffs {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Poly {
    coeffs: Coeffs,
    int_form: OnceLock<(IntPoly, BigInt)>,
    float_form: OnceLock<Vec<f64>>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        match (&self.coeffs, &other.coeffs) {
            (Coeffs::Exact(a), Coeffs::Exact(b)) => a == b,
            (Coeffs::Float(a), Coeffs::Float(b)) => a == b,
            _ => self.exact_coeffs() == other.exact_coeffs(),
        }
    }
}

// Error-free transformations for compensated Horner.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated Horner evaluation: as accurate as Horner in doubled precision.
pub(crate) fn comp_horner(c: &[f64], t: f64) -> f64 {
    let n = c.len();
    if n == 0 {
        return 0.0;
    }
    let mut s = c[n - 1];
    let mut err = 0.0;
    for i in (0..n - 1).rev() {
        let (p, pe) = two_prod(s, t);
        let (s2, se) = two_sum(p, c[i]);
        s = s2;
        err = err * t + (pe + se);
    }
    s + err
}

impl Poly {
    fn from_coeffs(coeffs: Coeffs) -> Self {
        let coeffs = match coeffs {
            Coeffs::Exact(mut v) => {
                while v.last().is_some_and(|x| x.is_zero()) {
                    v.pop();
                }
                Coeffs::Exact(v)
            }
            Coeffs::Float(mut v) => {
                while v.last() == Some(&0.0) {
                    v.pop();
                }
                Coeffs::Float(v)
            }
        };
        Self {
            coeffs,
            int_form: OnceLock::new(),
            float_form: OnceLock::new(),
        }
    }

    pub fn exact(coeffs: Vec<BigRational>) -> Self {
        Self::from_coeffs(Coeffs::Exact(coeffs))
    }

    /// Double-precision coefficients. Non-finite values are rejected.
    pub fn float(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PolyError::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self::from_coeffs(Coeffs::Float(coeffs)))
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::exact(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self::exact(Vec::new())
    }

    /// `t^d`.
    pub fn monomial(d: usize) -> Self {
        let mut c = vec![BigRational::zero(); d + 1];
        c[d] = BigRational::one();
        Self::exact(c)
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.coeffs, Coeffs::Exact(_))
    }

    fn len(&self) -> usize {
        match &self.coeffs {
            Coeffs::Exact(v) => v.len(),
            Coeffs::Float(v) => v.len(),
        }
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.len() == 0
    }

    /// Exact coefficients; double coefficients convert without rounding.
    pub fn exact_coeffs(&self) -> Vec<BigRational> {
        match &self.coeffs {
            Coeffs::Exact(v) => v.clone(),
            Coeffs::Float(v) => v.iter().map(|&x| rational_from_f64(x)).collect(),
        }
    }

    /// Coefficients rounded to doubles (cached).
    pub fn float_coeffs(&self) -> &[f64] {
        self.float_form.get_or_init(|| match &self.coeffs {
            Coeffs::Float(v) => v.clone(),
            Coeffs::Exact(v) => v
                .iter()
                .map(|q| ratio_to_f64(q.numer(), q.denom()))
                .collect(),
        })
    }

    pub fn coeff_f64(&self, j: usize) -> f64 {
        self.float_coeffs().get(j).copied().unwrap_or(0.0)
    }

    pub(crate) fn int_form(&self) -> &(IntPoly, BigInt) {
        self.int_form
            .get_or_init(|| IntPoly::from_rationals(&self.exact_coeffs()))
    }

    pub fn to_exact(&self) -> Poly {
        Poly::exact(self.exact_coeffs())
    }

    pub fn to_float(&self) -> Poly {
        Poly::from_coeffs(Coeffs::Float(self.float_coeffs().to_vec()))
    }

    fn map_indexed(
        &self,
        fe: impl Fn(usize, &BigRational) -> BigRational,
        ff: impl Fn(usize, f64) -> f64,
    ) -> Poly {
        match &self.coeffs {
            Coeffs::Exact(v) => Poly::exact(v.iter().enumerate().map(|(j, c)| fe(j, c)).collect()),
            Coeffs::Float(v) => Poly::from_coeffs(Coeffs::Float(
                v.iter().enumerate().map(|(j, &c)| ff(j, c)).collect(),
            )),
        }
    }

    /// `p(t)`: compensated Horner for double coefficients, exact evaluation
    /// with a single final rounding for exact coefficients.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.coeffs {
            Coeffs::Float(v) => comp_horner(v, t),
            Coeffs::Exact(_) => {
                let v = self.eval_exact_at(t);
                ratio_to_f64(v.numer(), v.denom())
            }
        }
    }

    /// Fast double-precision evaluation regardless of representation.
    pub fn eval_fast(&self, t: f64) -> f64 {
        comp_horner(self.float_coeffs(), t)
    }

    /// Exact value at a double (taken as the dyadic rational it represents).
    pub fn eval_exact_at(&self, t: f64) -> BigRational {
        let (ip, den) = self.int_form();
        ip.eval_f64_exact(t) / BigRational::from_integer(den.clone())
    }

    pub fn eval_rational(&self, t: &BigRational) -> BigRational {
        let c = self.exact_coeffs();
        let mut acc = BigRational::zero();
        for x in c.iter().rev() {
            acc = acc * t + x;
        }
        acc
    }

    /// `order`-th formal derivative (`order = 0` is the identity).
    pub fn derivative(&self, order: usize) -> Poly {
        let n = self.len();
        if order >= n {
            return match self.coeffs {
                Coeffs::Exact(_) => Poly::zero(),
                Coeffs::Float(_) => Poly::from_coeffs(Coeffs::Float(Vec::new())),
            };
        }
        let falling = |j: usize| -> BigInt {
            let mut f = BigInt::one();
            for i in 0..order {
                f *= BigInt::from(j - i);
            }
            f
        };
        match &self.coeffs {
            Coeffs::Exact(v) => Poly::exact(
                (order..n)
                    .map(|j| &v[j] * BigRational::from_integer(falling(j)))
                    .collect(),
            ),
            Coeffs::Float(v) => Poly::from_coeffs(Coeffs::Float(
                (order..n)
                    .map(|j| v[j] * falling(j).to_f64().unwrap_or(f64::INFINITY))
                    .collect(),
            )),
        }
    }

    /// `q(t) = p(λ t)`.
    pub fn scale_argument(&self, lambda: f64) -> Result<Poly, PolyError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PolyError::InvalidArgument(format!(
                "scale factor must be positive and finite, got {lambda}"
            )));
        }
        match &self.coeffs {
            Coeffs::Exact(_) => Ok(self.scale_argument_exact(&rational_from_f64(lambda))),
            Coeffs::Float(_) => {
                Ok(self.map_indexed(|_, c| c.clone(), |j, c| c * lambda.powi(j as i32)))
            }
        }
    }

    pub fn scale_argument_exact(&self, lambda: &BigRational) -> Poly {
        let mut pow = BigRational::one();
        let mut out = Vec::with_capacity(self.len());
        for c in self.exact_coeffs() {
            out.push(c * &pow);
            pow *= lambda;
        }
        Poly::exact(out)
    }

    /// `p(-t)`.
    pub fn reflect(&self) -> Poly {
        self.map_indexed(
            |j, c| if j % 2 == 1 { -c.clone() } else { c.clone() },
            |j, c| if j % 2 == 1 { -c } else { c },
        )
    }

    pub fn odd_part(&self) -> Poly {
        self.map_indexed(
            |j, c| {
                if j % 2 == 1 {
                    c.clone()
                } else {
                    BigRational::zero()
                }
            },
            |j, c| if j % 2 == 1 { c } else { 0.0 },
        )
    }

    pub fn even_part(&self) -> Poly {
        self.map_indexed(
            |j, c| {
                if j % 2 == 0 {
                    c.clone()
                } else {
                    BigRational::zero()
                }
            },
            |j, c| if j % 2 == 0 { c } else { 0.0 },
        )
    }

    pub fn without_constant(&self) -> Poly {
        self.map_indexed(
            |j, c| {
                if j == 0 {
                    BigRational::zero()
                } else {
                    c.clone()
                }
            },
            |j, c| if j == 0 { 0.0 } else { c },
        )
    }

    /// `p(t) + c` computed exactly.
    pub fn add_constant(&self, c: &BigRational) -> Poly {
        let mut v = self.exact_coeffs();
        if v.is_empty() {
            v.push(BigRational::zero());
        }
        v[0] += c;
        Poly::exact(v)
    }

    /// `t · p(t)`.
    pub fn mul_t(&self) -> Poly {
        let mut v = self.exact_coeffs();
        if v.is_empty() {
            return Poly::zero();
        }
        v.insert(0, BigRational::zero());
        Poly::exact(v)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let a = self.exact_coeffs();
        let b = other.exact_coeffs();
        let n = a.len().max(b.len());
        Poly::exact(
            (0..n)
                .map(|j| {
                    a.get(j).cloned().unwrap_or_else(BigRational::zero)
                        + b.get(j).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    /// `c · p(t)`, exactly.
    pub fn mul_scalar(&self, c: &BigRational) -> Poly {
        Poly::exact(self.exact_coeffs().into_iter().map(|a| a * c).collect())
    }

    pub fn is_odd(&self) -> bool {
        match &self.coeffs {
            Coeffs::Exact(v) => v.iter().step_by(2).all(|c| c.is_zero()),
            Coeffs::Float(v) => v.iter().step_by(2).all(|c| *c == 0.0),
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.coeffs {
            Coeffs::Exact(v) => v.iter().skip(1).step_by(2).all(|c| c.is_zero()),
            Coeffs::Float(v) => v.iter().skip(1).step_by(2).all(|c| *c == 0.0),
        }
    }

    /// Largest coefficient magnitude (as a double).
    pub fn max_abs_coeff(&self) -> f64 {
        self.float_coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Bound on the modulus of every complex root.
    pub fn root_bound(&self) -> Result<f64, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        Ok(roots::root_bound(&self.int_form().0))
    }

    /// All real roots in `[lo, hi]` with default refinement width
    /// `1e-14 · max(1, |hi|)`.
    pub fn isolate_roots(&self, lo: f64, hi: f64) -> Result<RootList, PolyError> {
        self.isolate_roots_with(lo, hi, 1e-14 * hi.abs().max(1.0))
    }

    pub fn isolate_roots_with(&self, lo: f64, hi: f64, width: f64) -> Result<RootList, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(PolyError::InvalidArgument(format!(
                "bad interval [{lo}, {hi}]"
            )));
        }
        Ok(roots::isolate(&self.int_form().0, lo, hi, width))
    }

    /// Every real root.
    pub fn real_roots(&self) -> Result<RootList, PolyError> {
        let b = self.root_bound()?;
        let b = if b.is_finite() {
            b * 1.01 + 1e-12
        } else {
            f64::MAX / 4.0
        };
        self.isolate_roots(-b, b)
    }

    /// Local expansion around a double `t0`: returns `p(t0) mod 2π` (computed
    /// with `bits` bits of fixed-point precision) and the double coefficients
    /// of `p(t0 + s) − p(t0)` in powers of `s`.
    pub fn local_expansion(&self, t0: f64, bits: u64) -> (f64, Vec<f64>) {
        let (ip, den) = self.int_form();
        let d = match ip.degree() {
            Some(d) => d,
            None => return (0.0, Vec::new()),
        };
        let (m, e) = dyadic(t0);
        let (m, e) = if e >= 0 {
            (m << e as usize, 0u64)
        } else {
            (m, (-e) as u64)
        };
        let g = ip.shrink_pow2(e).taylor_shift(&m);
        let mut local = Vec::with_capacity(d + 1);
        for (j, gj) in g.c.iter().enumerate() {
            let den_j = den << (e * (d - j) as u64) as usize;
            local.push(if j == 0 {
                0.0
            } else {
                ratio_to_f64(gj, &den_j)
            });
        }
        while local.len() < d + 1 {
            local.push(0.0);
        }
        let base = if g.c.is_empty() {
            BigRational::zero()
        } else {
            BigRational::new(g.c[0].clone(), den << (e * d as u64) as usize)
        };
        (fixed::reduce_mod_two_pi(&base, bits), local)
    }

    /// `p(t) mod 2π` in extended precision.
    pub fn phase_mod_two_pi(&self, t: f64, bits: u64) -> f64 {
        fixed::reduce_mod_two_pi(&self.eval_exact_at(t), bits)
    }

    /// Sign of `p(t)`, exact.
    pub fn sign_at(&self, t: f64) -> i8 {
        match self.int_form().0.sign_at(t) {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    /// Leading coefficient sign (`0` for the zero polynomial).
    pub fn leading_sign(&self) -> i8 {
        match &self.coeffs {
            Coeffs::Exact(v) => v.last().map_or(0, |c| if c.is_positive() { 1 } else { -1 }),
            Coeffs::Float(v) => v.last().map_or(0, |c| if *c > 0.0 { 1 } else { -1 }),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for j in (0..self.len()).rev() {
            let s = match &self.coeffs {
                Coeffs::Exact(v) if !v[j].is_zero() => v[j].to_string(),
                Coeffs::Float(v) if v[j] != 0.0 => v[j].to_string(),
                _ => continue,
            };
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{s}")?,
                1 => write!(f, "({s})t")?,
                _ => write!(f, "({s})t^{j}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn eval_identity_and_root() {
        assert_eq!(Poly::monomial(1).eval(2.0), 2.0);
        let p = Poly::exact(vec![q(1, 1), q(0, 1), q(-1, 4)]);
        assert_eq!(p.eval(2.0), 0.0);
    }

    #[test]
    fn degree_of_zero_is_minus_one() {
        assert_eq!(Poly::zero().degree(), -1);
        assert_eq!(Poly::from_i64(&[0, 0, 0]).degree(), -1);
        assert_eq!(Poly::float(vec![1.0, 0.0]).unwrap().degree(), 0);
    }

    #[test]
    fn derivative_cases() {
        assert_eq!(Poly::monomial(3).derivative(1), Poly::from_i64(&[0, 0, 3]));
        assert!(Poly::from_i64(&[5]).derivative(1).is_zero());
        assert_eq!(Poly::monomial(4).derivative(4), Poly::from_i64(&[24]));
    }

    #[test]
    fn scale_argument_cases() {
        let p = Poly::monomial(2).scale_argument(2.0).unwrap();
        assert_eq!(p, Poly::from_i64(&[0, 0, 4]));
        let r = Poly::from_i64(&[1, -2, 3]);
        assert_eq!(r.scale_argument(1.0).unwrap(), r);
        assert!(r.scale_argument(0.0).is_err());
    }

    #[test]
    fn roots_examples() {
        let p = Poly::from_i64(&[-2, 0, 1]);
        let r = p.isolate_roots(0.0, 2.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.roots[0].value - std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!(Poly::from_i64(&[1, 0, 1])
            .isolate_roots(-10.0, 10.0)
            .unwrap()
            .is_empty());
        assert_eq!(
            Poly::zero().isolate_roots(0.0, 1.0),
            Err(PolyError::ZeroPolynomial)
        );
    }

    #[test]
    fn roots_of_known_factorization() {
        // (t-1)(t-2)(t+3)(t-0.5)(t+0.25) has five simple roots.
        let mut p = Poly::from_i64(&[1]);
        for r in [1.0, 2.0, -3.0, 0.5, -0.25] {
            let f = Poly::float(vec![-r, 1.0]).unwrap();
            p = mul(&p, &f);
        }
        let r = p.isolate_roots(-10.0, 10.0).unwrap();
        let expect = [-3.0, -0.25, 0.5, 1.0, 2.0];
        assert_eq!(r.len(), expect.len());
        for (got, want) in r.values().iter().zip(expect) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    fn mul(a: &Poly, b: &Poly) -> Poly {
        let a = a.exact_coeffs();
        let b = b.exact_coeffs();
        let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Poly::exact(c)
    }

    #[test]
    fn local_expansion_matches_direct() {
        let p = Poly::float(vec![0.0, 1.5, -2.0, 0.25, 3.0]).unwrap();
        let (base, loc) = p.local_expansion(1.25, 128);
        let direct = p.eval(1.25).rem_euclid(2.0 * std::f64::consts::PI);
        assert!((base - direct).abs() < 1e-13);
        for s in [-0.1, 0.05, 0.3] {
            let v = comp_horner(&loc, s);
            assert!((v - (p.eval(1.25 + s) - p.eval(1.25))).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn rational_and_float_eval_agree(
            coeffs in proptest::collection::vec(-1e6f64..1e6, 1..31),
            t in -1.5f64..1.5,
        ) {
            let pf = Poly::float(coeffs).unwrap();
            let pe = pf.to_exact();
            let a = pf.eval(t);
            let b = pe.eval(t);
            let scale: f64 = pf.float_coeffs().iter().enumerate()
                .map(|(j, c)| c.abs() * t.abs().powi(j as i32)).sum();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) || (a - b).abs() <= 4.0 * f64::EPSILON * f64::EPSILON * scale + 1e-300,
                "{a} vs {b}");
        }

        #[test]
        fn derivative_commutes_with_scaling(
            coeffs in proptest::collection::vec(-100i64..100, 1..12),
            num in 1i64..20, den in 1i64..20,
        ) {
            let p = Poly::from_i64(&coeffs);
            let lam = q(num, den);
            let lhs = p.scale_argument_exact(&lam).derivative(1);
            let rhs = p.derivative(1).scale_argument_exact(&lam);
            let rhs = Poly::exact(rhs.exact_coeffs().into_iter().map(|c| c * &lam).collect());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
