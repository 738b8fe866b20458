//! Pieces of the upper-bound argument `I(P) ≲ log deg P`.
//!
//! A polynomial with `p(0) = 0` is rescaled so its top half of coefficients
//! has maximum modulus one and split as `P = Q + R` with `Q` the low half.
//! On `|t| ≤ 1` the integral of `e^{iP}/t` differs from that of `e^{iQ}/t`
//! by at most `2 Σ_{j>k} |a_j|/j`. On `|t| ≥ 1` the range where `|P'| > α`
//! is handled by Van der Corput's lemma and the rest is controlled by its
//! logarithmic measure. Recursing on `Q` halves the degree each step.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::poly::int::rational_from_f64;
use crate::poly::{Poly, PolyError};
use crate::pvint::{oscillatory_poly, pv_window, ray_integral, PvError};
use crate::special::ln_abs_rational;
use crate::sublevel::{sublevel_measure, vinogradov_bound, SublevelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpperboundError {
    #[error("precondition failed at t = {at}: {what}")]
    PreconditionFailed { at: f64, what: String },
    #[error("degree {0} is too small; need at least 2")]
    DegreeTooSmall(isize),
    #[error("the polynomial must vanish at 0")]
    NonzeroConstant,
    #[error("the derivative is constant")]
    DegenerateDerivative,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Pv(#[from] PvError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sublevel(#[from] SublevelError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdCCheck {
    pub k: u32,
    pub lambda: f64,
    pub interval: (f64, f64),
    pub integral_modulus: f64,
    /// `integral_modulus · λ^{1/k}`.
    pub ratio: f64,
    pub precondition_verified: bool,
}

/// Breakpoints of `[a, b]` at the roots of each listed polynomial, sorted.
fn partition(polys: &[&Poly], a: f64, b: f64) -> Result<Vec<f64>, PolyError> {
    let mut cuts = vec![a, b];
    for p in polys {
        if p.degree() >= 1 {
            cuts.extend(p.isolate_roots(a, b)?.values());
        }
    }
    cuts.retain(|&c| c >= a && c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(cuts)
}

/// Verifies `|φ^{(k)}| ≥ 1` on `[a, b]` and, for `k = 1`, that `φ'` is
/// monotone there. Both checks use exact signs on a root partition.
pub fn vdc_precondition(phi: &Poly, k: u32, a: f64, b: f64) -> Result<(), UpperboundError> {
    if k == 0 {
        return Err(UpperboundError::InvalidArgument(
            "k must be at least 1".into(),
        ));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(UpperboundError::InvalidArgument(format!(
            "bad interval [{a}, {b}]"
        )));
    }
    let g = phi.to_exact().derivative(k as usize);
    let one = BigRational::from_integer(1.into());
    let above = g.add_constant(&-one.clone());
    let below = g.add_constant(&one);
    let big_enough = |t: f64| above.sign_at(t) >= 0 || below.sign_at(t) <= 0;
    let cuts = partition(&[&above, &below], a, b)?;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if !big_enough(mid) {
            return Err(UpperboundError::PreconditionFailed {
                at: mid,
                what: format!("|φ^({k})| < 1"),
            });
        }
    }
    if k == 1 {
        let second = phi.to_exact().derivative(2);
        let cuts = partition(&[&second], a, b)?;
        let mut seen = 0i8;
        for w in cuts.windows(2) {
            let s = second.sign_at(0.5 * (w[0] + w[1]));
            if s != 0 && seen != 0 && s != seen {
                return Err(UpperboundError::PreconditionFailed {
                    at: w[0],
                    what: "φ' is not monotone".into(),
                });
            }
            if s != 0 {
                seen = s;
            }
        }
    }
    Ok(())
}

/// `|∫_a^b e^{iλφ}|` and the Van der Corput ratio `|∫| λ^{1/k}`.
pub fn vdc_check(
    phi: &Poly,
    k: u32,
    lambda: f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<VdCCheck, UpperboundError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(UpperboundError::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    vdc_precondition(phi, k, a, b)?;
    let scaled = phi.to_exact().mul_scalar(&rational_from_f64(lambda));
    let modulus = oscillatory_poly(&scaled, a, b, tol)?.norm();
    Ok(VdCCheck {
        k,
        lambda,
        interval: (a, b),
        integral_modulus: modulus,
        ratio: modulus * lambda.powf(1.0 / k as f64),
        precondition_verified: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// Powers `1..=k` of the rescaled polynomial.
    pub q: Poly,
    /// Powers `k+1..=d` of the rescaled polynomial.
    pub r: Poly,
    pub k: usize,
    /// The argument scaling `t ↦ λt` applied before splitting.
    pub lambda: f64,
    /// Set when every high coefficient vanishes; then `λ = 1`.
    pub high_all_zero: bool,
}

/// Largest `λ` with `max_{j>k} |a_j| λ^j ≤ 1`, up to rounding of `λ`.
fn normalizer(c: &[BigRational], k: usize) -> Option<f64> {
    c.iter()
        .enumerate()
        .skip(k + 1)
        .filter(|(_, a)| !a.is_zero())
        .map(|(j, a)| (-ln_abs_rational(a) / j as f64).exp())
        .min_by(f64::total_cmp)
}

fn split_at(p: &Poly, k: usize) -> Split {
    let c = p.to_exact().exact_coeffs();
    let (scaled, lambda, high_all_zero) = match normalizer(&c, k) {
        Some(l) => (
            p.to_exact().scale_argument_exact(&rational_from_f64(l)),
            l,
            false,
        ),
        None => (p.to_exact(), 1.0, true),
    };
    let c = scaled.exact_coeffs();
    let mut low = c.clone();
    low.truncate(k + 1);
    let high: Vec<BigRational> = c
        .iter()
        .enumerate()
        .map(|(j, a)| {
            if j > k {
                a.clone()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    Split {
        q: Poly::exact(low),
        r: Poly::exact(high),
        k,
        lambda,
        high_all_zero,
    }
}

/// Rescales `p` so that `max_{j>k} |a_j| = 1` with `k = ⌊d/2⌋`, then splits
/// it into its low and high halves. The maximum is one up to the rounding of
/// `λ` to a double.
pub fn split_at_half(p: &Poly) -> Result<Split, UpperboundError> {
    let d = p.degree();
    if d < 2 {
        return Err(UpperboundError::DegreeTooSmall(d));
    }
    if !p.to_exact().exact_coeffs()[0].is_zero() {
        return Err(UpperboundError::NonzeroConstant);
    }
    Ok(split_at(p, d as usize / 2))
}

/// `2 Σ_{j>k} |a_j| / j`.
pub fn tail_coefficient_sum(p: &Poly, k: usize) -> f64 {
    p.float_coeffs()
        .iter()
        .enumerate()
        .skip(k + 1)
        .map(|(j, a)| 2.0 * a.abs() / j as f64)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallDerivative {
    /// `∫_{t≥1, |p'(t)|≤α} dt/t`.
    pub value: f64,
    /// `Σ_m |{s ∈ [1,2] : |p'(2^m s)| ≤ α}|`, an upper bound for `value`.
    pub certificate: f64,
    /// `Σ_m min(1, Vinogradov bound for p'(2^m ·) on [1,2])`, an upper bound
    /// for `certificate`.
    pub vinogradov_sum: f64,
    pub blocks: usize,
}

/// The logarithmic measure of `{t ≥ 1 : |p'(t)| ≤ α}` with its dyadic
/// certificate.
pub fn small_derivative_log_measure(
    p: &Poly,
    alpha: f64,
) -> Result<SmallDerivative, UpperboundError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(UpperboundError::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let d1 = p.to_exact().derivative(1);
    if d1.degree() < 1 {
        return Err(UpperboundError::DegenerateDerivative);
    }
    let a = rational_from_f64(alpha);
    let above = d1.add_constant(&-a.clone());
    let below = d1.add_constant(&a);
    // Past every root of p' ∓ α the set is empty, since |p'| → ∞.
    let far = above.root_bound()?.max(below.root_bound()?).max(1.0) * 1.01 + 1e-9;
    let cuts = partition(&[&above, &below], 1.0, far)?;
    let mut value = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if above.sign_at(mid) <= 0 && below.sign_at(mid) >= 0 {
            value += (w[1] / w[0]).ln();
        }
    }
    let blocks = far.log2().ceil().max(1.0) as usize;
    let mut certificate = 0.0;
    let mut vinogradov_sum = 0.0;
    for m in 0..blocks {
        let scale = BigRational::from_integer(num_bigint::BigInt::from(1) << m);
        let h = d1.scale_argument_exact(&scale);
        certificate += sublevel_measure(&h, alpha, 1.0, 2.0)?.measure;
        vinogradov_sum += vinogradov_bound(&h, alpha)?.min(1.0);
    }
    Ok(SmallDerivative {
        value,
        certificate,
        vinogradov_sum,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// `α = d^{(d−1)/d}` for the nominal degree `d` of each level.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdTrace {
    /// Nominal degree of this level, a power of two.
    pub d: usize,
    /// Actual degree of the rescaled polynomial at this level.
    pub degree: isize,
    pub alpha_used: f64,
    pub lambda_norm: f64,
    /// `|p.v.∫_{|t|≤1} e^{iP}/t|`.
    pub i1: f64,
    /// `|∫_1^∞ e^{iP}/t|`.
    pub i2_plus: f64,
    /// `|∫_{−∞}^{−1} e^{iP}/t|`.
    pub i2_minus: f64,
    /// `|p.v.∫ e^{iP}/t|` assembled from the three pieces.
    pub total: f64,
    /// Both rays; absent when `P'` is constant.
    pub small_deriv_log_measure: Option<f64>,
    /// `Σ |∫_J e^{iP}/t|` over the intervals `J ⊂ {|t| ≥ 1, |P'| > α}` on
    /// which `P'` is monotone.
    pub oscillatory_piece: f64,
    pub oscillatory_intervals: usize,
    /// `2 Σ_{j>k} |a_j| / j` for the rescaled coefficients.
    pub tail_coeff_sum: f64,
    /// `|p.v.∫_{|t|≤1} e^{iQ}/t|` for the low half `Q`.
    pub q_window: f64,
    pub recursion_child: Option<Box<KdTrace>>,
}

impl KdTrace {
    /// Number of recursion steps below this level.
    pub fn depth(&self) -> usize {
        self.recursion_child.as_ref().map_or(0, |c| 1 + c.depth())
    }

    /// `I1 + I2⁺ + I2⁻`.
    pub fn piece_sum(&self) -> f64 {
        self.i1 + self.i2_plus + self.i2_minus
    }
}

/// `Σ |∫_J e^{ip}/t|` over the pieces of `{t ≥ 1 : |p'| > α}` on which `p'`
/// is monotone, and the number of pieces.
fn large_derivative_part(p: &Poly, alpha: f64, tol: f64) -> Result<(f64, usize), UpperboundError> {
    let d1 = p.derivative(1);
    let a = rational_from_f64(alpha);
    let above = d1.add_constant(&-a.clone());
    let below = d1.add_constant(&a);
    let d2 = p.derivative(2);
    let mut far = 1.0f64;
    for q in [&above, &below, &d2] {
        if q.degree() >= 1 {
            far = far.max(q.root_bound()? * 1.01 + 1e-9);
        }
    }
    let mut cuts = partition(&[&above, &below, &d2], 1.0, far)?;
    cuts.push(f64::INFINITY);
    let mut total = 0.0;
    let mut count = 0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            lo + 1.0
        };
        if above.sign_at(probe) > 0 || below.sign_at(probe) < 0 {
            let b = hi.is_finite().then_some(hi);
            total += ray_integral(p, lo, b, tol)?.norm();
            count += 1;
        }
    }
    Ok((total, count))
}

fn rays(p: &Poly, tol: f64) -> Result<(Complex64, Complex64), UpperboundError> {
    if p.degree() < 1 {
        // ∫ e^{ic}/t over t ≥ 1 and t ≤ −1 diverge separately but cancel
        // in the symmetric combination; both are reported as zero.
        return Ok((Complex64::zero(), Complex64::zero()));
    }
    let plus = ray_integral(p, 1.0, None, tol)?;
    // ∫_{−∞}^{−1} e^{ip(t)}/t dt = −∫_1^∞ e^{ip(−s)}/s ds.
    let minus = -ray_integral(&p.reflect(), 1.0, None, tol)?;
    Ok((plus, minus))
}

fn trace_level(p: &Poly, d: usize, alpha: Alpha, tol: f64) -> Result<KdTrace, UpperboundError> {
    let alpha_used = match alpha {
        Alpha::Auto => (d as f64).powf((d as f64 - 1.0) / d as f64),
        Alpha::Fixed(a) => a,
    };
    let k = d / 2;
    let split = if d >= 2 { Some(split_at(p, k)) } else { None };
    let (poly, lambda_norm) = match &split {
        Some(s) => (s.q.add(&s.r), s.lambda),
        None => (p.to_exact(), 1.0),
    };
    let i1 = pv_window(&poly, 1.0, tol)?;
    let (plus, minus) = rays(&poly, tol)?;
    let total = (i1 + plus + minus).norm();

    let (small, osc, intervals) = if poly.degree() >= 2 {
        let small = small_derivative_log_measure(&poly, alpha_used)?.value
            + small_derivative_log_measure(&poly.reflect(), alpha_used)?.value;
        let (op, np) = large_derivative_part(&poly, alpha_used, tol)?;
        let (om, nm) = large_derivative_part(&poly.reflect(), alpha_used, tol)?;
        (Some(small), op + om, np + nm)
    } else {
        (
            None,
            plus.norm() + minus.norm(),
            usize::from(poly.degree() >= 1) * 2,
        )
    };

    let (tail_coeff_sum, q_window, child) = match split {
        Some(s) => {
            let qw = pv_window(&s.q, 1.0, tol)?.norm();
            let child = trace_level(&s.q, k, alpha, tol)?;
            (tail_coefficient_sum(&poly, k), qw, Some(Box::new(child)))
        }
        None => (0.0, i1.norm(), None),
    };
    Ok(KdTrace {
        d,
        degree: poly.degree(),
        alpha_used,
        lambda_norm,
        i1: i1.norm(),
        i2_plus: plus.norm(),
        i2_minus: minus.norm(),
        total,
        small_deriv_log_measure: small,
        oscillatory_piece: osc,
        oscillatory_intervals: intervals,
        tail_coeff_sum,
        q_window,
        recursion_child: child,
    })
}

/// The full recursion trace of `p`, treated as a polynomial of nominal
/// degree `2^⌈log₂ d⌉` so that each level halves the degree exactly and the
/// depth is `⌈log₂ d⌉`.
pub fn kd_trace(p: &Poly, alpha: Alpha, tol: f64) -> Result<KdTrace, UpperboundError> {
    if let Alpha::Fixed(a) = alpha {
        if !(a > 0.0 && a.is_finite()) {
            return Err(UpperboundError::InvalidArgument(format!(
                "alpha must be positive, got {a}"
            )));
        }
    }
    let c = p.to_exact().exact_coeffs();
    if c.first().is_some_and(|c0| !c0.is_zero()) {
        return Err(UpperboundError::NonzeroConstant);
    }
    let d = p.degree().max(1) as usize;
    trace_level(p, d.next_power_of_two(), alpha, tol)
}

/// `2 Σ_{j=k+1}^{d} 1/j`, the bound on the tail coefficient sum after
/// normalization.
pub fn harmonic_tail(d: usize, k: usize) -> f64 {
    (k + 1..=d).map(|j| 2.0 / j as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn vdc_linear_phase() {
        let r = vdc_check(&Poly::monomial(1), 1, 100.0, 0.0, 1.0, 1e-12).unwrap();
        let exact = (Complex64::from_polar(1.0, 100.0) - 1.0).norm() / 100.0;
        assert!((r.integral_modulus - exact).abs() < 1e-10);
        assert!(r.ratio <= 2.0);
    }

    #[test]
    fn vdc_fresnel() {
        let phi = Poly::exact(vec![q(0, 1), q(0, 1), q(1, 2)]);
        let lambda = 1e4;
        let r = vdc_check(&phi, 2, lambda, 0.0, 1.0, 1e-10).unwrap();
        let asym = 0.5 * (2.0 * PI / lambda).sqrt();
        assert!(
            (r.integral_modulus / asym - 1.0).abs() < 0.05,
            "{}",
            r.integral_modulus
        );
    }

    #[test]
    fn vdc_precondition_rejects() {
        let phi = Poly::exact(vec![q(0, 1), q(0, 1), q(1, 4)]);
        assert!(matches!(
            vdc_check(&phi, 2, 10.0, 0.0, 1.0, 1e-9),
            Err(UpperboundError::PreconditionFailed { .. })
        ));
        // φ' = 3t² − 3 is not monotone on [−1, 1] though |φ'| may be large.
        let phi = Poly::from_i64(&[0, -3, 0, 1]).mul_scalar(&q(10, 1));
        assert!(matches!(
            vdc_precondition(&phi, 1, -0.5, 0.5),
            Err(UpperboundError::PreconditionFailed { .. })
        ));
        assert!(vdc_precondition(&phi, 1, 0.1, 0.5).is_ok());
    }

    #[test]
    fn precondition_agrees_with_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let k = rng.gen_range(1..=4u32);
            let c: Vec<f64> = (0..=k as usize + 2)
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect();
            let phi = Poly::float(c).unwrap();
            if vdc_precondition(&phi, k, 0.0, 1.0).is_ok() {
                let g = phi.derivative(k as usize);
                for i in 0..=10_000 {
                    assert!(g.eval(i as f64 * 1e-4).abs() >= 1.0 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn split_indices_and_normalization() {
        let p = Poly::from_i64(&[0, 1, 2, 3, -8, 1]);
        let s = split_at_half(&p).unwrap();
        assert_eq!(s.k, 2);
        assert!(s.q.degree() <= 2);
        let high = s.r.float_coeffs();
        assert!(high[..3].iter().all(|&x| x == 0.0));
        let m = high.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!((m - 1.0).abs() < 1e-14, "{m}");
        assert_eq!(
            split_at_half(&Poly::monomial(1)),
            Err(UpperboundError::DegreeTooSmall(1))
        );
        assert_eq!(
            split_at_half(&Poly::from_i64(&[1, 0, 1])),
            Err(UpperboundError::NonzeroConstant)
        );
    }

    #[test]
    fn tail_sum_is_harmonic_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let d = rng.gen_range(2..=64);
            let mut c: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            c[0] = 0.0;
            let s = split_at_half(&Poly::float(c).unwrap()).unwrap();
            let sum = tail_coefficient_sum(&s.r, s.k);
            assert!(sum <= harmonic_tail(d, s.k) * (1.0 + 1e-12));
            assert!(harmonic_tail(d, s.k) <= 2.0 * 2f64.ln() + 2.0 / (s.k + 1) as f64);
        }
    }

    #[test]
    fn small_derivative_examples() {
        let p = Poly::exact(vec![q(0, 1), q(0, 1), q(1, 2)]);
        let r = small_derivative_log_measure(&p, 2.0).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-14);
        assert!(r.value <= r.certificate + 1e-10);
        assert_eq!(small_derivative_log_measure(&p, 0.5).unwrap().value, 0.0);
        assert_eq!(
            small_derivative_log_measure(&Poly::monomial(1), 1.0),
            Err(UpperboundError::DegenerateDerivative)
        );
    }

    #[test]
    fn small_derivative_certificates_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let d = rng.gen_range(2..=12);
            let mut c: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            c[0] = 0.0;
            let s = split_at_half(&Poly::float(c).unwrap()).unwrap();
            let p = s.q.add(&s.r);
            for alpha in [1e-3, 0.1, 1.0] {
                let r = small_derivative_log_measure(&p, alpha).unwrap();
                assert!(r.value <= r.certificate + 1e-10);
                assert!(r.certificate <= r.vinogradov_sum + 1e-12);
            }
        }
    }

    #[test]
    fn trace_of_linear() {
        let t = kd_trace(&Poly::monomial(1), Alpha::Auto, 1e-10).unwrap();
        assert!(t.recursion_child.is_none());
        assert!((t.total - PI).abs() < 1e-8);
        assert!((t.piece_sum() - PI).abs() < 1e-8 + 2.0);
    }

    #[test]
    fn trace_of_cubic() {
        let p = Poly::from_i64(&[0, 1, 0, 1]);
        let t = kd_trace(&p, Alpha::Auto, 1e-10).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.recursion_child.as_ref().unwrap().d, 2);
        let direct = crate::pvint::pv_integral(&p, 1e-10).unwrap().value;
        assert!((t.total - direct).abs() < 1e-8);
        assert!(direct <= t.piece_sum() + 1e-8);
        assert!(t.i1 <= t.q_window + t.tail_coeff_sum + 1e-8);
        let small = t.small_deriv_log_measure.unwrap();
        assert!(t.i2_plus + t.i2_minus <= t.oscillatory_piece + small + 1e-8);
    }
}
