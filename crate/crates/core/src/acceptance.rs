//! The acceptance suite: nine numbered checks, each reporting one pass/fail
//! line. Shared by the `acceptance` test target and `oscint selftest`.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrepancy::discrepancy_integral;
use crate::experiments::{profile_integral, CALIBRATED_RATIO_THRESHOLD};
use crate::extremal::{
    construct_extremal, eval_extremal_convolution, kernel_normalizer, leading_coefficient_formula,
};
use crate::poly::Poly;
use crate::pvint::{extremal_parts, pv_integral, pv_integral_extremal, PvOptions};
use crate::sublevel::sublevel_measure;
use crate::upperbound::{
    kd_trace, small_derivative_log_measure, split_at_half, vdc_check, vdc_precondition, Alpha,
};

/// Bound on `|∫_0^1 e^{iλφ}| λ^{1/k} / k` over the random admissible suite.
/// Set from a calibration run (observed maximum 1.24, at `λ = 10²`) with
/// margin.
pub const VDC_RATIO_CONSTANT: f64 = 3.0;

/// Allowed growth of the suite maximum of `ratio/k` from `λ = 10²` to
/// `λ = 10⁶`; a trend like `λ^ε` with `ε ≥ 0.05` would exceed it.
pub const VDC_GROWTH_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} [{}] {}: {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Engine tolerance for PV and quadrature.
    pub tol: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            tol: 1e-9,
        }
    }
}

fn rng_for(cfg: &AcceptanceConfig, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(id as u64 + 1)))
}

/// Even polynomial of even degree in `2..=max_degree`, coefficients uniform
/// in `[−1, 1]`.
pub fn random_even_poly(rng: &mut impl Rng, max_degree: usize) -> Poly {
    let d = 2 * rng.gen_range(1..=max_degree / 2);
    let c = (0..=d)
        .map(|j| {
            if j % 2 == 0 {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    Poly::float(c).expect("finite").to_exact()
}

/// Polynomial with `p(0) = 0` and degree in `1..=max_degree`, coefficients
/// uniform in `[−1, 1]`.
pub fn random_vanishing_poly(rng: &mut impl Rng, max_degree: usize) -> Poly {
    let d = rng.gen_range(1..=max_degree);
    let c = (0..=d)
        .map(|j| {
            if j == 0 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect();
    Poly::float(c).expect("finite").to_exact()
}

/// Random phase on `[0, 1]` with `|φ^{(k)}| ≥ 1` there (and `φ'` monotone
/// when `k = 1`), or `None` if the draw could not be made admissible.
pub fn random_admissible_phase(rng: &mut impl Rng, k: u32) -> Option<Poly> {
    let extra = if k == 1 { 1 } else { rng.gen_range(0..=2) };
    let d = k as usize + extra;
    let mut c: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // Shift the constant term of φ^{(k)} so its minimum modulus on [0,1]
    // is about 1.5, preserving a random sign.
    let g = Poly::float(c.clone()).ok()?.derivative(k as usize);
    let (lo, hi) = (0..=200)
        .map(|i| g.eval(i as f64 / 200.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    let fact: f64 = (1..=k).map(f64::from).product();
    let shift = if rng.gen_bool(0.5) {
        1.5 - lo
    } else {
        -1.5 - hi
    };
    c[k as usize] += shift / fact;
    let phi = Poly::float(c).ok()?.to_exact();
    vdc_precondition(&phi, k, 0.0, 1.0).ok().map(|_| phi)
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn criterion_1(cfg: &AcceptanceConfig) -> Outcome {
    timed(1, "monomial law", || {
        let start = Instant::now();
        let mut worst = 0.0f64;
        for d in (1..=49).step_by(2) {
            match pv_integral(&Poly::monomial(d), cfg.tol) {
                Ok(r) => worst = worst.max((r.value * d as f64 / PI - 1.0).abs()),
                Err(e) => return (false, format!("d = {d}: {e}")),
            }
        }
        let secs = start.elapsed().as_secs_f64();
        (
            worst <= 1e-6 && secs < 30.0,
            format!("max relative error {worst:.2e} over odd d ≤ 49, {secs:.2} s"),
        )
    })
}

pub fn criterion_2(cfg: &AcceptanceConfig) -> Outcome {
    timed(2, "even annihilation", || {
        let mut rng = rng_for(cfg, 2);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let p = random_even_poly(&mut rng, 20);
            match pv_integral(&p, cfg.tol) {
                Ok(r) => worst = worst.max(r.value),
                Err(e) => return (false, e.to_string()),
            }
        }
        (
            worst <= 1e-8,
            format!("max |pv| {worst:.2e} over 20 even polynomials"),
        )
    })
}

pub fn criterion_3(cfg: &AcceptanceConfig) -> Outcome {
    timed(3, "dual representation", || {
        let mut rng = rng_for(cfg, 3);
        let ts: Vec<f64> = (0..100).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut worst = 0.0f64;
        for n in 2..=6 {
            let e = match construct_extremal(n, n) {
                Ok(e) => e,
                Err(err) => return (false, err.to_string()),
            };
            for &t in &ts {
                let coeff = e.eval_coeff(t);
                match eval_extremal_convolution(n, n, t, 1e-12) {
                    Ok(conv) => worst = worst.max((coeff - conv).abs() / coeff.abs()),
                    Err(err) => return (false, err.to_string()),
                }
            }
        }
        (
            worst <= 1e-8,
            format!("max relative gap {worst:.2e} at 100 points, n = 2..6"),
        )
    })
}

pub fn criterion_4(_cfg: &AcceptanceConfig) -> Outcome {
    timed(4, "exact leading coefficient", || {
        let mut bad = Vec::new();
        for n in 2..=8 {
            let ok = match (construct_extremal(n, n), leading_coefficient_formula(n, n)) {
                (Ok(e), Ok(f)) => e.a_k == f,
                _ => false,
            };
            if !ok {
                bad.push(n);
            }
        }
        let c1 =
            kernel_normalizer(1).ok() == Some(BigRational::new(BigInt::from(3), BigInt::from(8)));
        let c2 = kernel_normalizer(2).ok()
            == Some(BigRational::new(BigInt::from(315), BigInt::from(512)));
        (
            bad.is_empty() && c1 && c2,
            format!(
                "a_k exact for n = 2..8 (mismatches {bad:?}); c_1 = 3/8: {c1}; c_2 = 315/512: {c2}"
            ),
        )
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub n: u32,
    pub i_pn: f64,
    /// Signed `∫_0^1 sin P_n(t)/t dt`.
    pub head: f64,
    /// Signed `∫_1^∞ sin P_n(t)/t dt`.
    pub tail: f64,
    pub i_fn: f64,
    pub d_n: f64,
}

/// Rows for criterion 5, computed independently per `n`.
pub fn growth_rows(ns: &[u32], tol: f64) -> Result<Vec<GrowthRow>, String> {
    ns.par_iter()
        .map(|&n| {
            let e = construct_extremal(n, n).map_err(|e| e.to_string())?;
            let opts = PvOptions::new(tol);
            let i_pn = pv_integral_extremal(&e, &opts)
                .map_err(|e| e.to_string())?
                .value;
            let (head, tail) = extremal_parts(&e, &opts).map_err(|e| e.to_string())?;
            let i_fn = profile_integral(n, tol).map_err(|e| e.to_string())?;
            let d_n = discrepancy_integral(n, tol).map_err(|e| e.to_string())?.d_n;
            Ok(GrowthRow {
                n,
                i_pn,
                head,
                tail: tail.value,
                i_fn,
                d_n,
            })
        })
        .collect()
}

pub fn criterion_5(cfg: &AcceptanceConfig) -> Outcome {
    timed(5, "growth law", || {
        let tol = cfg.tol;
        let rows = match growth_rows(&(3..=10).collect::<Vec<_>>(), tol) {
            Ok(r) => r,
            Err(e) => return (false, e),
        };
        // D_n bounds the half-line gap |∫_0^1 (sin P_n − sin f_n)/t|, and
        // I(f_n) is twice the half-line integral of sin f_n / t.
        let half_line_ok = rows
            .iter()
            .all(|r| (r.head - r.i_fn / 2.0).abs() <= r.d_n + 2.0 * tol);
        let full_line_ok = rows
            .iter()
            .all(|r| (r.i_pn - r.i_fn).abs() <= 2.0 * r.d_n + 2.0 * r.tail.abs() + 2.0 * tol);
        let literal_worst = rows
            .iter()
            .map(|r| (r.i_pn - r.i_fn).abs() - r.d_n)
            .fold(f64::NEG_INFINITY, f64::max);

        let ratios: Vec<f64> = [4u32, 8, 16, 32]
            .iter()
            .map(|&n| discrepancy_integral(n, tol).map_or(f64::NAN, |r| r.ratio))
            .collect();
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);

        let min_ratio = rows
            .iter()
            .filter(|r| r.n >= 6)
            .map(|r| r.i_pn / ((2 * r.n * r.n - 1) as f64).ln())
            .fold(f64::INFINITY, f64::min);
        let above = min_ratio >= CALIBRATED_RATIO_THRESHOLD;

        let detail = format!(
            "half-line chain |I_1(P_n) − I(f_n)/2| ≤ D_n + 2tol for n = 3..10: {half_line_ok}; \
             full line |I(P_n) − I(f_n)| ≤ 2D_n + 2|tail| + 2tol: {full_line_ok}; \
             unnormalized |I(P_n) − I(f_n)| − D_n reaches {literal_worst:.3}; \
             D_n/log n over 4,8,16,32 = {:.4?} decreasing: {decreasing}; \
             min I(P_n)/log(2n²−1) for n ≥ 6 = {min_ratio:.4} vs threshold {CALIBRATED_RATIO_THRESHOLD}",
            ratios
        );
        (half_line_ok && full_line_ok && decreasing && above, detail)
    })
}

/// `|{t ∈ [lo, hi] : |h(t)| ≤ α}|` by counting grid cells whose midpoint is
/// in the set.
pub fn grid_sublevel_measure(h: &Poly, alpha: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let c = h.float_coeffs();
    let eval = |t: f64| c.iter().rev().fold(0.0, |acc, &a| acc * t + a);
    let cells = ((hi - lo) / step).round() as usize;
    let width = (hi - lo) / cells as f64;
    (0..cells)
        .filter(|&i| eval(lo + (i as f64 + 0.5) * width).abs() <= alpha)
        .count() as f64
        * width
}

pub fn criterion_6(cfg: &AcceptanceConfig) -> Outcome {
    timed(6, "Vinogradov sublevel bound", || {
        let mut rng = rng_for(cfg, 6);
        let alphas = [1e-3, 1e-2, 1e-1, 1.0];
        let cases: Vec<(Poly, f64)> = (0..1000)
            .map(|i| {
                let d = rng.gen_range(1..=8);
                let c = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (Poly::float(c).expect("finite").to_exact(), alphas[i % 4])
            })
            .collect();
        let results: Vec<Result<(f64, f64), String>> = cases
            .par_iter()
            .map(|(h, a)| {
                let r = sublevel_measure(h, *a, 1.0, 2.0).map_err(|e| e.to_string())?;
                Ok((r.measure, r.bound.unwrap_or(f64::INFINITY)))
            })
            .collect();
        let mut violations = 0;
        let mut tightest = 0.0f64;
        for r in &results {
            match r {
                Ok((m, b)) => {
                    if m > b {
                        violations += 1;
                    }
                    tightest = tightest.max(m / b);
                }
                Err(e) => return (false, e.clone()),
            }
        }
        let grid_worst = cases[..100]
            .par_iter()
            .zip(&results[..100])
            .map(|((h, a), r)| {
                let exact = r.as_ref().map_or(f64::NAN, |x| x.0);
                (grid_sublevel_measure(h, *a, 1.0, 2.0, 1e-5) - exact).abs()
            })
            .reduce(|| 0.0, f64::max);
        (
            violations == 0 && grid_worst <= 2e-5,
            format!(
                "{violations} violations in 1000 cases (max measure/bound {tightest:.3}); \
                 grid oracle gap {grid_worst:.2e} on 100 cases"
            ),
        )
    })
}

pub fn criterion_7(cfg: &AcceptanceConfig) -> Outcome {
    timed(7, "small-derivative certificate", || {
        let mut rng = rng_for(cfg, 7);
        let cases: Vec<(Poly, f64)> = (0..200)
            .map(|_| {
                let mut p = random_vanishing_poly(&mut rng, 16);
                while p.degree() < 2 {
                    p = random_vanishing_poly(&mut rng, 16);
                }
                let s = split_at_half(&p).expect("degree ≥ 2 and p(0) = 0");
                (s.q.add(&s.r), 10f64.powf(rng.gen_range(-3.0..0.5)))
            })
            .collect();
        let out: Vec<Result<(f64, f64), String>> = cases
            .par_iter()
            .map(|(p, a)| {
                let r = small_derivative_log_measure(p, *a).map_err(|e| e.to_string())?;
                Ok((r.value, r.certificate))
            })
            .collect();
        let mut violations = 0;
        let mut nonzero = 0;
        for r in &out {
            match r {
                Ok((v, c)) => {
                    if *v > c + 1e-10 {
                        violations += 1;
                    }
                    if *v > 0.0 {
                        nonzero += 1;
                    }
                }
                Err(e) => return (false, e.clone()),
            }
        }
        (
            violations == 0,
            format!("{violations} violations in 200 cases ({nonzero} with a nonempty set)"),
        )
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VdcSample {
    pub k: u32,
    pub lambda: f64,
    pub ratio_over_k: f64,
}

/// Van der Corput ratios over a random admissible suite on `[0, 1]`.
pub fn vdc_suite(seed: u64, per_k: usize, tol: f64) -> Result<Vec<VdcSample>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = Vec::new();
    for k in 1..=6u32 {
        let mut found = 0;
        while found < per_k {
            if let Some(phi) = random_admissible_phase(&mut rng, k) {
                phases.push((k, phi));
                found += 1;
            }
        }
    }
    let jobs: Vec<(u32, Poly, f64)> = phases
        .into_iter()
        .flat_map(|(k, phi)| [1e2, 1e4, 1e6].map(|l| (k, phi.clone(), l)))
        .collect();
    jobs.par_iter()
        .map(|(k, phi, lambda)| {
            let r = vdc_check(phi, *k, *lambda, 0.0, 1.0, tol).map_err(|e| e.to_string())?;
            Ok(VdcSample {
                k: *k,
                lambda: *lambda,
                ratio_over_k: r.ratio / *k as f64,
            })
        })
        .collect()
}

pub fn criterion_8(cfg: &AcceptanceConfig) -> Outcome {
    timed(8, "Van der Corput", || {
        let phi = Poly::exact(vec![
            BigRational::from_integer(0.into()),
            BigRational::from_integer(0.into()),
            BigRational::new(1.into(), 2.into()),
        ]);
        let lambda = 1e4;
        let fresnel = match vdc_check(&phi, 2, lambda, 0.0, 1.0, cfg.tol) {
            Ok(r) => r.integral_modulus / (0.5 * (2.0 * PI / lambda).sqrt()),
            Err(e) => return (false, e.to_string()),
        };
        let samples = match vdc_suite(cfg.seed ^ 8, 8, cfg.tol) {
            Ok(s) => s,
            Err(e) => return (false, e),
        };
        let max_at = |l: f64| {
            samples
                .iter()
                .filter(|s| s.lambda == l)
                .map(|s| s.ratio_over_k)
                .fold(0.0f64, f64::max)
        };
        let (m2, m4, m6) = (max_at(1e2), max_at(1e4), max_at(1e6));
        let c = m2.max(m4).max(m6);
        let fresnel_ok = (fresnel - 1.0).abs() <= 0.05;
        let bounded = c <= VDC_RATIO_CONSTANT;
        let flat = m6 <= VDC_GROWTH_FACTOR * m2;
        (
            fresnel_ok && bounded && flat,
            format!(
                "Fresnel modulus / asymptote = {fresnel:.4}; {} samples, max ratio/k by λ = 1e2, 1e4, 1e6: \
                 {m2:.3}, {m4:.3}, {m6:.3}; constant {c:.3} ≤ {VDC_RATIO_CONSTANT}",
                samples.len()
            ),
        )
    })
}

pub fn criterion_9(cfg: &AcceptanceConfig) -> Outcome {
    timed(9, "upper-bound trace", || {
        let mut rng = rng_for(cfg, 9);
        let polys: Vec<Poly> = (0..50)
            .map(|_| random_vanishing_poly(&mut rng, 32))
            .collect();
        let out: Vec<Result<(bool, bool, f64), String>> = polys
            .par_iter()
            .map(|p| {
                let pv = pv_integral(p, cfg.tol).map_err(|e| e.to_string())?.value;
                let t = kd_trace(p, Alpha::Auto, cfg.tol).map_err(|e| e.to_string())?;
                let d = p.degree() as usize;
                let want = d.next_power_of_two().trailing_zeros() as usize;
                Ok((
                    pv <= t.piece_sum() + cfg.tol,
                    t.depth() == want,
                    pv / t.piece_sum(),
                ))
            })
            .collect();
        let (mut bound_fail, mut depth_fail, mut worst) = (0, 0, 0.0f64);
        for r in &out {
            match r {
                Ok((b, d, ratio)) => {
                    bound_fail += usize::from(!b);
                    depth_fail += usize::from(!d);
                    worst = worst.max(*ratio);
                }
                Err(e) => return (false, e.clone()),
            }
        }
        (
            bound_fail == 0 && depth_fail == 0,
            format!(
                "50 polynomials: {bound_fail} bound failures (max |pv| / piece sum {worst:.3}), \
                 {depth_fail} depth mismatches"
            ),
        )
    })
}

pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> Option<Outcome> {
    Some(match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        _ => return None,
    })
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<Outcome> {
    (1..=9).filter_map(|id| run_criterion(id, cfg)).collect()
}
