//! The second difference `A(x,t) = |f(t+x) + f(t−x) − 2f(t)|` of the
//! trapezoid profile and the discrepancy
//! `D_n = ∫_0^2 ∫_0^1 A(x,t)/t dt φ_n(x) dx`, which bounds
//! `|∫_0^1 sin P_n(t)/t − ∫_0^1 sin f(t)/t|`.
//!
//! For fixed `x`, `A(x,·)` is piecewise linear, so the inner `t`-integral is
//! done in closed form (`∫|αt+β|/t` on each linear piece). The outer
//! `x`-integral uses adaptive quadrature with `φ_n` in log scale.

use serde::Serialize;
use thiserror::Error;

use crate::extremal::{ExtremalError, SmoothingKernel, TrapezoidProfile};
use crate::quad::{integrate_with_breaks, AdaptiveOptions, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscrepancyError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Extremal(#[from] ExtremalError),
    #[error("t must lie in [0, 1], got {0}")]
    OutOfRange(f64),
}

/// `|f(t+x) + f(t−x) − 2f(t)|`.
pub fn second_difference(n: u32, x: f64, t: f64) -> f64 {
    let f = TrapezoidProfile { n: n.max(2) };
    signed_difference(&f, x, t).abs()
}

fn signed_difference(f: &TrapezoidProfile, x: f64, t: f64) -> f64 {
    f.eval(t + x) + f.eval(t - x) - 2.0 * f.eval(t)
}

/// `∫_lo^hi |g(t)|/t dt` where `g = f(t+x) + f(t−x) − 2f(t)` is piecewise
/// linear in `t`; exact up to rounding.
fn inner_integral(f: &TrapezoidProfile, x: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = 1.0 / f.n as f64;
    let kinks = [-1.0, -1.0 + h, -h, 0.0, h, 1.0 - h, 1.0];
    let mut pts = vec![lo, hi];
    for k in kinks {
        pts.extend([k, k - x, k + x]);
    }
    pts.retain(|&p| p >= lo && p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Sample strictly inside the linear piece, where rounding near the
        // kinks cannot pick the wrong branch, then extrapolate to the ends.
        let q1 = signed_difference(f, x, a + 0.25 * (b - a));
        let q3 = signed_difference(f, x, a + 0.75 * (b - a));
        let ga = 1.5 * q1 - 0.5 * q3;
        let gb = 1.5 * q3 - 0.5 * q1;
        if ga * gb < 0.0 {
            let r = a + (b - a) * ga / (ga - gb);
            total += linear_over_t(a, r, ga, 0.0) + linear_over_t(r, b, 0.0, gb);
        } else {
            total += linear_over_t(a, b, ga, gb);
        }
    }
    total
}

/// `∫_a^b |L(t)|/t dt` for the linear `L` with `L(a) = la`, `L(b) = lb` of
/// one sign.
fn linear_over_t(a: f64, b: f64, la: f64, lb: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let alpha = (lb - la) / (b - a);
    let beta = la - alpha * a;
    let log_part = if a == 0.0 || beta == 0.0 {
        0.0
    } else {
        beta * (b / a).ln()
    };
    (alpha * (b - a) + log_part).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionValue {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n: u32,
    pub d_n: f64,
    pub region_values: Vec<RegionValue>,
    /// `D_n / log n`.
    pub ratio: f64,
    /// The same double integral without the region split.
    pub unsplit: f64,
    pub abs_error_est: f64,
}

type Limits = fn(f64, f64) -> (f64, f64);
type Region = (&'static str, fn(f64) -> (f64, f64), Limits);

/// The seven regions: x-range as a function of `h = 1/n`, and t-range as a
/// function of `(x, h)`.
fn regions() -> [Region; 7] {
    [
        ("upper_half", |_| (0.0, 2.0), |_, _| (0.5, 1.0)),
        ("below_diagonal", |h| (0.0, h), |x, _| (0.0, x)),
        ("small_t", |h| (h, 2.0), |_, h| (0.0, h)),
        ("diagonal_band", |h| (0.0, h), |x, h| (x, (x + h).min(0.5))),
        ("plateau", |h| (0.0, 0.5 - h), |x, h| (x + h, 0.5)),
        ("ramp_band", |h| (h, 0.5 - h), |x, h| (h, x + h)),
        ("wide_x", |h| ((0.5 - h).max(h), 2.0), |_, h| (h, 0.5)),
    ]
}

fn x_breaks(h: f64) -> Vec<f64> {
    let base = [
        0.0,
        h,
        0.5 - h,
        0.5,
        1.0 - h,
        1.0,
        1.0 + h,
        1.5,
        2.0 - h,
        2.0 * h,
        1.0 - 2.0 * h,
        0.5 + h,
    ];
    base.to_vec()
}

fn outer<F: Fn(f64) -> f64>(
    kernel: &SmoothingKernel,
    inner: F,
    lo: f64,
    hi: f64,
    h: f64,
    tol: f64,
) -> Result<(f64, f64), DiscrepancyError> {
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let g = |x: f64| {
        if x >= 2.0 {
            return 0.0;
        }
        let v = inner(x);
        if v == 0.0 {
            0.0
        } else {
            v * kernel.ln_eval(x).exp()
        }
    };
    let opts = AdaptiveOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        max_panels: 20_000,
    };
    let r = integrate_with_breaks(&g, lo, hi, &x_breaks(h), opts)?;
    Ok((r.value, r.abs_error))
}

/// `D_n` by the seven-region split, with the unsplit integral as a check.
pub fn discrepancy_integral(n: u32, tol: f64) -> Result<DiscrepancyReport, DiscrepancyError> {
    let f = TrapezoidProfile::new(n)?;
    let kernel = SmoothingKernel::new(n)?;
    let h = 1.0 / n as f64;
    let mut region_values = Vec::with_capacity(7);
    let mut total = 0.0;
    let mut err = 0.0;
    for (name, xr, tr) in regions() {
        let (lo, hi) = xr(h);
        let (v, e) = outer(
            &kernel,
            |x| {
                let (a, b) = tr(x, h);
                inner_integral(&f, x, a, b)
            },
            lo,
            hi,
            h,
            tol / 8.0,
        )?;
        region_values.push(RegionValue { name, value: v });
        total += v;
        err += e;
    }
    let (unsplit, _) = outer(
        &kernel,
        |x| inner_integral(&f, x, 0.0, 1.0),
        0.0,
        2.0,
        h,
        tol / 8.0,
    )?;
    Ok(DiscrepancyReport {
        n,
        d_n: total,
        ratio: total / (n as f64).ln(),
        region_values,
        unsplit,
        abs_error_est: err,
    })
}

/// `∫_0^2 A(x,t) φ_n(x) dx`, an upper bound for `|P_n(t) − f(t)|`.
pub fn pointwise_gap(n: u32, t: f64, tol: f64) -> Result<f64, DiscrepancyError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(DiscrepancyError::OutOfRange(t));
    }
    let f = TrapezoidProfile::new(n)?;
    let kernel = SmoothingKernel::new(n)?;
    let h = 1.0 / n as f64;
    let mut breaks = Vec::new();
    for k in [-1.0, -1.0 + h, -h, 0.0, h, 1.0 - h, 1.0] {
        breaks.extend([k - t, t - k]);
    }
    let g = |x: f64| {
        if x >= 2.0 {
            0.0
        } else {
            signed_difference(&f, x, t).abs() * kernel.ln_eval(x).exp()
        }
    };
    let opts = AdaptiveOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        max_panels: 20_000,
    };
    Ok(integrate_with_breaks(&g, 0.0, 2.0, &breaks, opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_difference_examples() {
        assert_eq!(second_difference(10, 0.1, 0.5), 0.0);
        for x in [0.0, 0.3, 1.7] {
            assert_eq!(second_difference(10, x, 0.0), 0.0);
        }
        assert!(second_difference(10, 0.02, 0.01) <= 0.4 + 1e-15);
    }

    #[test]
    fn inner_integral_matches_quadrature() {
        let f = TrapezoidProfile::new(7).unwrap();
        for x in [0.05, 0.2, 0.9, 1.6] {
            let exact = inner_integral(&f, x, 0.0, 1.0);
            let g = |t: f64| signed_difference(&f, x, t).abs() / t;
            let mut br = vec![];
            for k in [-1.0, -6.0 / 7.0, -1.0 / 7.0, 0.0, 1.0 / 7.0, 6.0 / 7.0, 1.0] {
                br.extend([k - x, k + x, k]);
            }
            let q = crate::quad::integrate_with_breaks(
                &g,
                1e-300,
                1.0,
                &br,
                AdaptiveOptions::absolute(1e-12),
            )
            .unwrap();
            assert!(
                (exact - q.value).abs() < 1e-10,
                "x={x}: {exact} vs {}",
                q.value
            );
        }
    }

    #[test]
    fn regions_sum_and_plateau() {
        for n in [2, 3, 4, 6, 8] {
            let r = discrepancy_integral(n, 1e-11).unwrap();
            assert!(
                (r.d_n - r.unsplit).abs() < 1e-8,
                "n={n}: {} vs {}",
                r.d_n,
                r.unsplit
            );
            let plateau = r
                .region_values
                .iter()
                .find(|v| v.name == "plateau")
                .unwrap();
            assert_eq!(plateau.value, 0.0);
            let upper = r
                .region_values
                .iter()
                .find(|v| v.name == "upper_half")
                .unwrap();
            assert!(upper.value <= 2.0 * 2f64.ln());
        }
    }

    #[test]
    fn gap_bounds_pointwise_error() {
        let e = crate::extremal::construct_extremal(8, 8).unwrap();
        let f = TrapezoidProfile::new(8).unwrap();
        for t in [0.0, 0.125, 0.3, 0.5, 0.9] {
            let gap = pointwise_gap(8, t, 1e-12).unwrap();
            assert!((e.eval(t) - f.eval(t)).abs() <= gap + 1e-12, "t={t}");
        }
        assert_eq!(pointwise_gap(8, 0.0, 1e-12).unwrap(), 0.0);
    }
}
