//! The trapezoid profile `f_n`, the polynomial kernel
//! `φ_k(y) = c_k (1 − y²/4)^{k²}`, and the odd extremal polynomials
//! `P_k = f_n * φ_k` of degree `2k² − 1`.
//!
//! `P_k` is available in three forms:
//! * exact rational coefficients, from closed-form moments of `f_n`;
//! * the convolution integral, by adaptive quadrature with a log-scale kernel;
//! * a closed form in the kernel antiderivatives. `f_n''` is a sum of six
//!   point masses, so `P_k = Σ w_j Φ₂(t − x_j)` with `Φ₂'' = φ_k`. This is the
//!   fast, cancellation-free evaluator used inside integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::poly::Poly;
use crate::quad::{integrate_with_breaks, AdaptiveOptions, GaussLegendre, QuadError};
use crate::special::ln_abs_rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Odd piecewise-linear profile: `nt` on `[0, 1/n]`, `1` on the plateau,
/// `n(1 − t)` on `[1 − 1/n, 1]`, zero beyond `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrapezoidProfile {
    pub n: u32,
}

impl TrapezoidProfile {
    pub fn new(n: u32) -> Result<Self, ExtremalError> {
        if n < 2 {
            return Err(ExtremalError::InvalidParameter(format!(
                "profile needs n >= 2, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.n as f64;
        let a = t.abs();
        // Kinks belong to the plateau so its value is exact there.
        let v = if a >= 1.0 {
            0.0
        } else if a < 1.0 / n {
            n * a
        } else if a > 1.0 - 1.0 / n {
            n * (1.0 - a)
        } else {
            1.0
        };
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    /// Kink locations and the jumps of `f'` there, left to right.
    pub fn kinks(&self) -> [(f64, f64); 6] {
        let n = self.n as f64;
        let h = 1.0 / n;
        [
            (-1.0, -n),
            (-1.0 + h, n),
            (-h, n),
            (h, -n),
            (1.0 - h, -n),
            (1.0, n),
        ]
    }

    /// Exact moment `∫_{-1}^{1} f(x) x^j dx`; zero for even `j`.
    pub fn moment(&self, j: usize) -> BigRational {
        if j.is_multiple_of(2) {
            return BigRational::zero();
        }
        let n = BigRational::from_integer(BigInt::from(self.n));
        let h = n.recip();
        let r = BigRational::one() - &h;
        let pw = |x: &BigRational, e: usize| num_traits::pow(x.clone(), e);
        let q = |v: usize| BigRational::from_integer(BigInt::from(v));
        let ramp_in = pw(&h, j + 1) / q(j + 2);
        let plateau = (pw(&r, j + 1) - pw(&h, j + 1)) / q(j + 1);
        let ramp_out = &n
            * ((BigRational::one() - pw(&r, j + 1)) / q(j + 1)
                - (BigRational::one() - pw(&r, j + 2)) / q(j + 2));
        (ramp_in + plateau + ramp_out) * q(2)
    }
}

/// Exact `c_k = 1 / (2 B(1/2, k² + 1)) = (2m+1)!! / (m! 2^{m+2})`, `m = k²`.
pub fn kernel_normalizer(k: u32) -> Result<BigRational, ExtremalError> {
    if k < 1 {
        return Err(ExtremalError::InvalidParameter(
            "kernel needs k >= 1".into(),
        ));
    }
    static MEMO: OnceLock<Mutex<HashMap<u32, BigRational>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = memo.lock().expect("memo poisoned").get(&k) {
        return Ok(c.clone());
    }
    let m = (k as u64) * (k as u64);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 1..=m {
        num *= BigInt::from(2 * i + 1);
        den *= BigInt::from(i);
    }
    den <<= (m + 2) as usize;
    let c = BigRational::new(num, den);
    memo.lock().expect("memo poisoned").insert(k, c.clone());
    Ok(c)
}

/// `φ_k(y) = c_k (1 − y²/4)^{k²}`, normalized to unit mass on `[-2, 2]`.
#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    pub k: u32,
    pub c_exact: BigRational,
    pub ln_c: f64,
    c: f64,
    rule: Arc<GaussLegendre>,
}

impl SmoothingKernel {
    pub fn new(k: u32) -> Result<Self, ExtremalError> {
        let c_exact = kernel_normalizer(k)?;
        let ln_c = ln_abs_rational(&c_exact);
        let m = (k as usize) * (k as usize);
        Ok(Self {
            k,
            c: ln_c.exp(),
            ln_c,
            c_exact,
            rule: GaussLegendre::cached(m + 1),
        })
    }

    pub fn power(&self) -> i32 {
        (self.k * self.k) as i32
    }

    /// `φ_k(y)`, evaluated as `±exp(ln c_k + k² ln|1 − y²/4|)`.
    pub fn eval(&self, y: f64) -> f64 {
        let base = 1.0 - 0.25 * y * y;
        if base == 0.0 {
            return 0.0;
        }
        let m = self.power();
        let mag = (self.ln_c + m as f64 * base.abs().ln()).exp();
        if base < 0.0 && m % 2 == 1 {
            -mag
        } else {
            mag
        }
    }

    /// `ln φ_k(y)` for `|y| < 2`.
    pub fn ln_eval(&self, y: f64) -> f64 {
        self.ln_c + self.power() as f64 * (1.0 - 0.25 * y * y).ln()
    }

    fn direct(&self, y: f64) -> f64 {
        self.c * (1.0 - 0.25 * y * y).powi(self.power())
    }

    /// `Φ₁(y) = ∫_0^y φ_k`, exact up to rounding (the rule integrates the
    /// polynomial exactly). The range `[0, 2]` carries mass `1/2`.
    pub fn antiderivative(&self, y: f64) -> f64 {
        let a = y.abs();
        let v = if a <= 2.0 {
            self.rule.integrate(|s| self.direct(s), 0.0, a)
        } else {
            0.5 + self.rule.integrate(|s| self.direct(s), 2.0, a)
        };
        if y < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `Φ₂(y) = ∫_0^y Φ₁ = y Φ₁(y) + 2c_k/(k²+1) (1 − y²/4)^{k²+1}` up to a
    /// constant.
    pub fn second_antiderivative(&self, y: f64) -> f64 {
        let m = self.power();
        y * self.antiderivative(y)
            + 2.0 * self.c / (m as f64 + 1.0) * (1.0 - 0.25 * y * y).powi(m + 1)
    }
}

/// `P_k = f_n * φ_k`, an odd polynomial of degree `2k² − 1`.
#[derive(Debug, Clone)]
pub struct ExtremalPoly {
    pub n: u32,
    pub k: u32,
    pub coeff_form: Poly,
    pub a_k: BigRational,
    pub profile: TrapezoidProfile,
    pub kernel: SmoothingKernel,
}

/// Builds `P_k` with exact coefficients. The coefficient of `t^i` is
/// `c_k Σ_m C(k², m)(−1/4)^m C(2m, i)(−1)^i μ_{2m−i}`.
pub fn construct_extremal(n: u32, k: u32) -> Result<ExtremalPoly, ExtremalError> {
    let profile = TrapezoidProfile::new(n)?;
    let kernel = SmoothingKernel::new(k)?;
    let big_k = (k as usize) * (k as usize);
    let moments: Vec<BigRational> = (0..=2 * big_k).map(|j| profile.moment(j)).collect();
    let quarter = BigRational::new(BigInt::from(-1), BigInt::from(4));
    let mut coeffs = vec![BigRational::zero(); 2 * big_k];
    let mut qpow = BigRational::one();
    for m in 0..=big_k {
        let outer =
            &qpow * BigRational::from_integer(binomial(BigInt::from(big_k), BigInt::from(m)));
        // Only odd i contribute: μ_{2m−i} vanishes for even 2m − i.
        for i in (1..=2 * m).step_by(2) {
            let mu = &moments[2 * m - i];
            let b = BigRational::from_integer(binomial(BigInt::from(2 * m), BigInt::from(i)));
            coeffs[i] -= &outer * b * mu;
        }
        qpow *= &quarter;
    }
    for c in coeffs.iter_mut() {
        *c *= &kernel.c_exact;
    }
    let coeff_form = Poly::exact(coeffs);
    let a_k = match coeff_form.coeffs() {
        crate::poly::Coeffs::Exact(v) => v.last().cloned().unwrap_or_else(BigRational::zero),
        crate::poly::Coeffs::Float(_) => unreachable!("constructed exactly"),
    };
    Ok(ExtremalPoly {
        n,
        k,
        coeff_form,
        a_k,
        profile,
        kernel,
    })
}

/// The closed-form leading coefficient `(−1)^{k²+1} 2c_k k² (1 − 1/n) / 4^{k²}`.
pub fn leading_coefficient_formula(n: u32, k: u32) -> Result<BigRational, ExtremalError> {
    let c = kernel_normalizer(k)?;
    let m = (k as usize) * (k as usize);
    let sign = if (m + 1).is_multiple_of(2) { 1 } else { -1 };
    let one_minus = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n));
    Ok(
        c * BigRational::from_integer(BigInt::from(2 * m as i64 * sign)) * one_minus
            / BigRational::from_integer(BigInt::one() << (2 * m)),
    )
}

impl ExtremalPoly {
    pub fn degree(&self) -> usize {
        2 * (self.k as usize) * (self.k as usize) - 1
    }

    /// `P_k(t)` from the kernel antiderivatives.
    pub fn eval(&self, t: f64) -> f64 {
        self.profile
            .kinks()
            .iter()
            .map(|&(x, w)| w * self.kernel.second_antiderivative(t - x))
            .sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.profile
            .kinks()
            .iter()
            .map(|&(x, w)| w * self.kernel.antiderivative(t - x))
            .sum()
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.profile
            .kinks()
            .iter()
            .map(|&(x, w)| w * self.kernel.eval(t - x))
            .sum()
    }

    /// `P_k(t) − P_k(s)` without forming either value at full size: the
    /// kernel pieces are differenced term by term.
    pub fn difference(&self, t: f64, s: f64) -> f64 {
        self.profile
            .kinks()
            .iter()
            .map(|&(x, w)| {
                w * (self.kernel.second_antiderivative(t - x)
                    - self.kernel.second_antiderivative(s - x))
            })
            .sum()
    }

    /// Exact coefficient-form value, rounded once.
    pub fn eval_coeff(&self, t: f64) -> f64 {
        self.coeff_form.eval(t)
    }

    pub fn leading_coefficient_f64(&self) -> f64 {
        let q = &self.a_k;
        let ln = ln_abs_rational(q);
        ln.exp().copysign(if q.is_negative() { -1.0 } else { 1.0 })
    }
}

/// `P_k(t) = ∫_{-1}^{1} f(x) φ_k(t − x) dx` by adaptive quadrature.
///
/// `tol` is absolute; refinement also stops once the estimate falls below
/// `1e-12` relative to the value.
pub fn eval_extremal_convolution(n: u32, k: u32, t: f64, tol: f64) -> Result<f64, ExtremalError> {
    if !(tol > 0.0) {
        return Err(ExtremalError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let profile = TrapezoidProfile::new(n)?;
    let kernel = SmoothingKernel::new(k)?;
    convolve(&profile, &kernel, t, tol)
}

pub(crate) fn convolve(
    profile: &TrapezoidProfile,
    kernel: &SmoothingKernel,
    t: f64,
    tol: f64,
) -> Result<f64, ExtremalError> {
    let mut breaks: Vec<f64> = profile.kinks().iter().map(|&(x, _)| x).collect();
    breaks.extend([t - 2.0, t + 2.0, t, 0.0]);
    let f = |x: f64| {
        let fx = profile.eval(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * kernel.eval(t - x)
        }
    };
    let opts = AdaptiveOptions {
        abs_tol: tol,
        rel_tol: 1e-12,
        max_panels: 20_000,
    };
    Ok(integrate_with_breaks(&f, -1.0, 1.0, &breaks, opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn profile_values() {
        let p = TrapezoidProfile::new(10).unwrap();
        assert_eq!(p.eval(0.5), 1.0);
        assert!((p.eval(0.05) - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(-0.5), -1.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert_eq!(p.eval(0.0), 0.0);
    }

    #[test]
    fn normalizer_small_cases() {
        assert_eq!(kernel_normalizer(1).unwrap(), q(3, 8));
        assert_eq!(kernel_normalizer(2).unwrap(), q(315, 512));
    }

    #[test]
    fn normalizer_asymptote() {
        let c = kernel_normalizer(20).unwrap();
        let r = ln_abs_rational(&c).exp() / 20.0;
        let target = 0.5 / std::f64::consts::PI.sqrt();
        assert!((r / target - 1.0).abs() < 0.01, "{r}");
        for k in 3..=12 {
            let r = ln_abs_rational(&kernel_normalizer(k).unwrap()).exp() / k as f64;
            assert!((0.2..=0.4).contains(&r));
        }
    }

    #[test]
    fn kernel_mass_is_one() {
        for k in 1..=12 {
            let kern = SmoothingKernel::new(k).unwrap();
            let r = crate::quad::integrate(
                &|y| kern.eval(y),
                -2.0,
                2.0,
                AdaptiveOptions::absolute(1e-13),
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "k={k}: {}", r.value);
            assert!((2.0 * kern.antiderivative(2.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_moment_matches_profile_factor() {
        let p = TrapezoidProfile::new(4).unwrap();
        assert_eq!(p.moment(1), q(3, 4));
        assert!(p.moment(2).is_zero());
        for n in 2..12 {
            let p = TrapezoidProfile::new(n).unwrap();
            assert_eq!(p.moment(1), BigRational::one() - q(1, n as i64));
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let p = TrapezoidProfile::new(7).unwrap();
        for j in [1usize, 3, 9, 15] {
            let r = crate::quad::integrate_with_breaks(
                &|x: f64| p.eval(x) * x.powi(j as i32),
                -1.0,
                1.0,
                &[-1.0 + 1.0 / 7.0, -1.0 / 7.0, 1.0 / 7.0, 1.0 - 1.0 / 7.0],
                AdaptiveOptions::absolute(1e-14),
            )
            .unwrap();
            let exact = ln_abs_rational(&p.moment(j)).exp();
            assert!((r.value - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn degree_one_case() {
        let e = construct_extremal(4, 1).unwrap();
        assert_eq!(e.coeff_form.degree(), 1);
        assert_eq!(e.a_k, q(9, 64));
    }

    #[test]
    fn odd_and_exact_leading_coefficient() {
        for n in 2..=6 {
            let e = construct_extremal(n, n).unwrap();
            assert_eq!(e.coeff_form.degree() as usize, e.degree());
            assert!(e.coeff_form.is_odd());
            assert_eq!(e.a_k, leading_coefficient_formula(n, n).unwrap());
        }
    }

    #[test]
    fn top_derivative_is_factorial_times_leading() {
        let e = construct_extremal(4, 2).unwrap();
        let d = e.coeff_form.derivative(7);
        let fact: BigInt = (1..=7).map(BigInt::from).product();
        let want = Poly::exact(vec![BigRational::from_integer(fact) * &e.a_k]);
        assert_eq!(d, want);
        // a_2 = -(2 c_2 4 / 4^4)(3/4) with c_2 = 315/512
        assert_eq!(e.a_k, -q(2 * 315 * 4, 512 * 256) * q(3, 4));
    }

    #[test]
    fn three_forms_agree() {
        let e = construct_extremal(4, 4).unwrap();
        for t in [0.5, -0.77, 1.3, 2.6] {
            let exact = e.eval_coeff(t);
            let conv = convolve(&e.profile, &e.kernel, t, 1e-300).unwrap();
            let closed = e.eval(t);
            assert!(
                (conv - exact).abs() <= 1e-10 * exact.abs(),
                "t={t}: {conv} vs {exact}"
            );
            assert!(
                (closed - exact).abs() <= 1e-10 * exact.abs().max(1.0),
                "t={t}: {closed} vs {exact}"
            );
        }
        assert!(eval_extremal_convolution(4, 4, 0.0, 1e-11).unwrap().abs() < 1e-15);
    }

    #[test]
    fn closed_form_derivatives_match_coefficients() {
        let e = construct_extremal(5, 5).unwrap();
        let d1 = e.coeff_form.derivative(1);
        let d2 = e.coeff_form.derivative(2);
        for t in [0.1, 0.45, 0.93, 1.7] {
            let a = d1.eval(t);
            assert!((e.derivative(t) - a).abs() < 1e-9 * a.abs().max(1.0));
            let b = d2.eval(t);
            assert!((e.second_derivative(t) - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn odd_under_convolution() {
        let e = construct_extremal(6, 6).unwrap();
        for i in 0..50 {
            let t = -1.0 + 2.0 * (i as f64 + 0.37) / 50.0;
            assert!((e.eval(t) + e.eval(-t)).abs() < 1e-10);
        }
    }
}
