//! Sublevel sets `{t : |h(t)| ≤ α}` of real polynomials: exact measures,
//! the Vinogradov-type coefficient bound with an explicit constant, and the
//! interpolation argument behind it (slide the set together, pick equally
//! spaced points, read the coefficients off the Lagrange interpolant).

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::poly::int::rational_from_f64;
use crate::poly::json::format_rational;
use crate::poly::{Poly, PolyError};
use crate::special::ln_abs_rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SublevelError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("the polynomial is identically zero")]
    ZeroPolynomial,
    #[error("a constant polynomial has no sublevel bound")]
    ConstantPolynomial,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the sublevel set is empty")]
    EmptySet,
    #[error("interpolation points must be distinct")]
    DuplicatePoints,
}

fn serialize_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelResult {
    pub measure: f64,
    /// Ordered disjoint closed subintervals; tangency points appear as
    /// zero-length components.
    pub components: Vec<(f64, f64)>,
    /// `(M_n α / max|b_k|)^{1/n}`; absent for constant `h`.
    pub bound: Option<f64>,
    #[serde(rename = "constant_Mn", serialize_with = "serialize_rational")]
    pub constant_mn: BigRational,
    /// Set when `h ≡ 0`, in which case the whole interval is returned.
    pub degenerate: bool,
}

/// Exact measure of `{t ∈ [lo, hi] : |h(t)| ≤ α}`.
///
/// The boundary is located by isolating the roots of `h − α` and `h + α`;
/// membership of each piece of the induced partition is decided by exact
/// sign evaluation at its midpoint.
pub fn sublevel_measure(
    h: &Poly,
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<SublevelResult, SublevelError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SublevelError::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SublevelError::InvalidArgument(format!(
            "bad interval [{lo}, {hi}]"
        )));
    }
    if h.is_zero() {
        return Ok(SublevelResult {
            measure: hi - lo,
            components: vec![(lo, hi)],
            bound: None,
            constant_mn: BigRational::zero(),
            degenerate: true,
        });
    }
    let h = h.to_exact();
    let a = rational_from_f64(alpha);
    let upper = h.add_constant(&-a.clone());
    let lower = h.add_constant(&a);

    let mut cuts = vec![lo, hi];
    for q in [&upper, &lower] {
        if q.degree() >= 1 {
            cuts.extend(q.isolate_roots(lo, hi)?.values());
        }
    }
    cuts.retain(|&c| c >= lo && c <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let inside = |t: f64| upper.sign_at(t) <= 0 && lower.sign_at(t) >= 0;
    let mut components: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if inside(a + 0.5 * (b - a)) {
            match components.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => components.push((a, b)),
            }
        }
    }
    // Closed-set convention: a boundary root whose neighbours are both
    // outside is kept as a single point.
    for &c in &cuts {
        let covered = components.iter().any(|&(a, b)| a <= c && c <= b);
        if !covered && inside(c) {
            let at = components.partition_point(|&(a, _)| a < c);
            components.insert(at, (c, c));
        }
    }
    let measure = components.iter().map(|(a, b)| b - a).sum();

    let n = h.degree();
    let (bound, constant_mn) = if n >= 1 {
        (
            Some(vinogradov_bound(&h, alpha)?),
            vinogradov_constant(n as u32),
        )
    } else {
        (None, BigRational::zero())
    };
    Ok(SublevelResult {
        measure,
        components,
        bound,
        constant_mn,
        degenerate: false,
    })
}

/// `M_n = max_{0≤k≤n} C(n, n−k) 2^{2n−k} n^n / n!`, exactly.
pub fn vinogradov_constant(n: u32) -> BigRational {
    let nn = BigInt::from(n).pow(n);
    let fact: BigInt = (1..=n)
        .map(BigInt::from)
        .product::<BigInt>()
        .max(BigInt::one());
    let best = (0..=n)
        .map(|k| binomial(BigInt::from(n), BigInt::from(n - k)) << (2 * n - k) as usize)
        .max()
        .unwrap_or_else(BigInt::one);
    BigRational::new(best * nn, fact)
}

/// `(M_n α / max_k |b_k|)^{1/n}` with `n = deg h`. Valid as a bound on the
/// measure of the sublevel set inside any interval contained in `[0, 2]`.
pub fn vinogradov_bound(h: &Poly, alpha: f64) -> Result<f64, SublevelError> {
    if h.is_zero() {
        return Err(SublevelError::ZeroPolynomial);
    }
    if h.degree() < 1 {
        return Err(SublevelError::ConstantPolynomial);
    }
    if !(alpha > 0.0) {
        return Err(SublevelError::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let n = h.degree() as u32;
    let big = h
        .to_exact()
        .exact_coeffs()
        .into_iter()
        .map(|c| c.abs())
        .max()
        .expect("nonzero polynomial");
    // Logs keep M_n (which grows like (8e)^n) and tiny coefficients in range.
    let ln = ln_abs_rational(&vinogradov_constant(n)) + alpha.ln() - ln_abs_rational(&big);
    Ok((ln / n as f64).exp())
}

/// Packs the components into `[0, L]` by removing the gaps, takes the
/// `n + 1` equally spaced points `iL/n` there, and maps them back. Any two
/// returned points satisfy `|x_j − x_k| ≥ L |j − k| / n`.
pub fn slide_and_select(components: &[(f64, f64)], n: u32) -> Result<Vec<f64>, SublevelError> {
    if n == 0 {
        return Err(SublevelError::InvalidArgument(
            "n must be at least 1".into(),
        ));
    }
    let mut parts: Vec<(f64, f64)> = components.iter().copied().filter(|(a, b)| b > a).collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    if parts.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(SublevelError::InvalidArgument("components overlap".into()));
    }
    let total: f64 = parts.iter().map(|(a, b)| b - a).sum();
    if !(total > 0.0) {
        return Err(SublevelError::EmptySet);
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut idx = 0;
    let mut before = 0.0;
    for i in 0..=n {
        let s = total * i as f64 / n as f64;
        while idx + 1 < parts.len() && s > before + (parts[idx].1 - parts[idx].0) {
            before += parts[idx].1 - parts[idx].0;
            idx += 1;
        }
        let (a, b) = parts[idx];
        out.push((a + (s - before)).clamp(a, b));
    }
    Ok(out)
}

/// `σ_0, …, σ_m` of the given points.
pub fn elementary_symmetric(points: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::zero(); points.len() + 1];
    e[0] = BigRational::one();
    for (i, x) in points.iter().enumerate() {
        for m in (1..=i + 1).rev() {
            let add = &e[m - 1] * x;
            e[m] += add;
        }
    }
    e
}

/// Exact interpolant through `(x_j, y_j)`, with
/// `b_k = Σ_j y_j (−1)^{n−k} σ_{n−k}(x without x_j) / Π_{i≠j}(x_j − x_i)`.
pub fn lagrange_coefficients_exact(
    points: &[BigRational],
    values: &[BigRational],
) -> Result<Poly, SublevelError> {
    if points.is_empty() || points.len() != values.len() {
        return Err(SublevelError::InvalidArgument(format!(
            "need equally many points and values, got {} and {}",
            points.len(),
            values.len()
        )));
    }
    let n = points.len() - 1;
    let mut b = vec![BigRational::zero(); n + 1];
    for (j, (xj, yj)) in points.iter().zip(values).enumerate() {
        let others: Vec<BigRational> = points
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, x)| x.clone())
            .collect();
        let mut denom = BigRational::one();
        for x in &others {
            let diff = xj - x;
            if diff.is_zero() {
                return Err(SublevelError::DuplicatePoints);
            }
            denom *= diff;
        }
        let scale = yj / denom;
        let sigma = elementary_symmetric(&others);
        for (k, bk) in b.iter_mut().enumerate() {
            let term = &sigma[n - k] * &scale;
            if (n - k).is_multiple_of(2) {
                *bk += term;
            } else {
                *bk -= term;
            }
        }
    }
    Ok(Poly::exact(b))
}

/// [`lagrange_coefficients_exact`] on double inputs, each read exactly.
pub fn lagrange_coefficients(points: &[f64], values: &[f64]) -> Result<Poly, SublevelError> {
    let to_q = |v: &[f64]| -> Result<Vec<BigRational>, SublevelError> {
        v.iter()
            .map(|&x| {
                if x.is_finite() {
                    Ok(rational_from_f64(x))
                } else {
                    Err(SublevelError::InvalidArgument(format!(
                        "non-finite input {x}"
                    )))
                }
            })
            .collect()
    };
    lagrange_coefficients_exact(&to_q(points)?, &to_q(values)?)
}

/// `C(n, n−k) 2^{n−k}` as a double, the bound on `σ_{n−k}` of `n` points in
/// `[0, 2]`.
pub fn sigma_bound(n: u32, k: u32) -> f64 {
    binomial(BigInt::from(n), BigInt::from(n - k))
        .to_f64()
        .unwrap_or(f64::INFINITY)
        * 2f64.powi((n - k) as i32)
}
