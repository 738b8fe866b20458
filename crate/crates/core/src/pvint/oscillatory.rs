//! Lobe summation for `∫_a^b e^{iq(t)} w(t) dt` with polynomial-like phase.
//!
//! The range is cut at the critical points of `q` so that `q` is monotone on
//! each piece. A piece is walked in blocks across which `q` changes by
//! exactly `π`, aligned to multiples of `π`; each block is one lobe of
//! `sin q` and of `cos q` shifted by half a lobe. Consecutive block integrals
//! alternate in sign with slowly varying magnitude, so long runs are summed
//! with the Euler transform (repeated averaging of partial sums):
//!
//! * an infinite tail beyond the monotonicity point is the regularized sum of
//!   its blocks;
//! * a long finite piece equals the regularized forward sum from its left end
//!   plus the regularized backward sum from its right end, since both are the
//!   boundary terms of repeated integration by parts.
//!
//! Convergence is checked by doubling the number of directly summed blocks.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad::{integrate, AdaptiveOptions};

use super::phase::{Anchor, Phase, Weight};
use super::PvError;

/// Terms fed to the Euler transform.
const EULER_TERMS: usize = 24;
/// Finite pieces with at most this many blocks are summed directly.
const DIRECT_LIMIT: usize = 4096;
const FIRST_M: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct OscOptions {
    pub tol: f64,
    pub max_lobes: usize,
}

#[derive(Debug, Clone, Default)]
pub struct OscResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub lobes: usize,
    /// Largest `t` at which a block was evaluated.
    pub radius: f64,
    /// Start of the monotone tail, if the range was infinite.
    pub cutoff: Option<f64>,
    /// Block values of the monotone tail, in order.
    pub tail_blocks: Vec<Complex64>,
}

/// Walks blocks of a monotone piece from one end.
struct Walker<'a> {
    phase: &'a dyn Phase,
    w: Weight,
    anchor: Anchor,
    /// +1 walking right, −1 walking left.
    dir: f64,
    /// Sign of the change of `q` along the walk.
    sigma: f64,
    t: f64,
    next_target: f64,
    /// Far end of the piece (`None` for an infinite tail).
    end: Option<f64>,
    done: bool,
    block_tol: f64,
    evaluated: usize,
}

impl<'a> Walker<'a> {
    fn new(
        phase: &'a dyn Phase,
        w: Weight,
        start: f64,
        dir: f64,
        sigma: f64,
        end: Option<f64>,
        block_tol: f64,
    ) -> Self {
        let anchor = phase.anchor(start);
        let r = anchor.theta.rem_euclid(PI);
        let first = if sigma > 0.0 {
            if r == 0.0 {
                PI
            } else {
                PI - r
            }
        } else if r == 0.0 {
            -PI
        } else {
            -r
        };
        Self {
            phase,
            w,
            anchor,
            dir,
            sigma,
            t: start,
            next_target: first,
            end,
            done: false,
            block_tol,
            evaluated: 0,
        }
    }

    /// Progress function along the walk: increasing, zero at the start.
    fn progress(&self, t: f64) -> f64 {
        self.sigma * self.phase.delta(&self.anchor, t)
    }

    /// Next block value and its quadrature error.
    fn next_block(&mut self) -> Result<Option<(Complex64, f64)>, PvError> {
        if self.done {
            return Ok(None);
        }
        let target = self.sigma * self.next_target;
        let t_next = match self.end {
            Some(e) if self.progress(e) <= target => {
                self.done = true;
                e
            }
            _ => self.solve(target)?,
        };
        let (a, b) = if self.dir > 0.0 {
            (self.t, t_next)
        } else {
            (t_next, self.t)
        };
        let (v, err) = self.integrate_block(a, b)?;
        self.t = t_next;
        self.next_target += self.sigma * PI;
        self.evaluated += 1;
        Ok(Some((v, err)))
    }

    fn integrate_block(&self, a: f64, b: f64) -> Result<(Complex64, f64), PvError> {
        if a == b {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let f = |t: f64| Complex64::from_polar(self.w.at(t), self.phase.delta(&self.anchor, t));
        let opts = AdaptiveOptions {
            abs_tol: self.block_tol,
            rel_tol: 1e-12,
            max_panels: 2000,
        };
        let r = integrate(&f, a, b, opts)?;
        let rot = Complex64::from_polar(1.0, self.anchor.theta);
        Ok((r.value * rot, r.abs_error))
    }

    /// Point along the walk where the progress reaches `target`.
    fn solve(&self, target: f64) -> Result<f64, PvError> {
        let at = |x: f64| self.t + self.dir * x;
        let g = |x: f64| self.progress(at(x)) - target;
        // Bracket [0, hi] with g(0) < 0 <= g(hi).
        let scale = self.t.abs().max(1.0);
        let slope = (self.phase.slope(self.t) * self.sigma * self.dir).abs();
        let remaining = target - self.progress(self.t);
        // Newton step from the start, kept within one scale length so a
        // near-stationary start cannot throw the bracket out of range.
        let mut hi = if slope > 0.0 && slope.is_finite() {
            (remaining / slope).clamp(1e-12 * scale, scale)
        } else {
            1e-3 * scale
        };
        if let Some(e) = self.end {
            hi = hi.min((e - self.t).abs());
        }
        let mut lo = 0.0;
        let mut tries = 0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if let Some(e) = self.end {
                hi = hi.min((e - self.t).abs());
            }
            tries += 1;
            if tries > 2000 || !hi.is_finite() {
                return Err(PvError::NotConverged {
                    lobes: self.evaluated,
                    reason: format!("cannot bracket phase level near t = {}", self.t),
                });
            }
        }
        // Safeguarded Newton on [lo, hi].
        let mut x = hi;
        for _ in 0..200 {
            let gx = g(x);
            if gx == 0.0 {
                return Ok(at(x));
            }
            if !gx.is_finite() {
                hi = x;
                x = 0.5 * (lo + hi);
                continue;
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = (self.phase.slope(at(x)) * self.sigma * self.dir).abs();
            let newton = x - gx / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let width = hi - lo;
            if width <= 4.0 * f64::EPSILON * (self.t + self.dir * x).abs().max(1e-300)
                || (gx.abs() <= 1e-14 * target.abs().max(1.0) && width < 1e-6 * scale)
            {
                break;
            }
        }
        Ok(at(x))
    }
}

/// Euler transform of an alternating series given by its terms; returns the
/// estimate and the spread of the last two averaging levels.
pub(crate) fn euler_sum(terms: &[Complex64]) -> (Complex64, f64) {
    let mut level: Vec<Complex64> = terms
        .iter()
        .scan(Complex64::new(0.0, 0.0), |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect();
    let mut prev = level.clone();
    while level.len() > 1 {
        prev = level.clone();
        level = level.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect();
    }
    let best = level[0];
    let spread = prev.iter().map(|v| (v - best).norm()).fold(0.0, f64::max);
    (best, spread)
}

struct Piece {
    value: Complex64,
    err: f64,
    lobes: usize,
    radius: f64,
    blocks: Vec<Complex64>,
}

/// Blocks from a walker, with running counts.
struct Stream<'a> {
    walker: Walker<'a>,
    vals: Vec<Complex64>,
    errs: f64,
}

impl<'a> Stream<'a> {
    fn fill(&mut self, n: usize, budget: &mut usize) -> Result<bool, PvError> {
        while self.vals.len() < n {
            if *budget == 0 {
                return Err(PvError::NotConverged {
                    lobes: self.vals.len(),
                    reason: "maximum lobe count reached".into(),
                });
            }
            match self.walker.next_block()? {
                Some((v, e)) => {
                    self.vals.push(v);
                    self.errs += e;
                    *budget -= 1;
                }
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    fn estimate(&self, m: usize) -> (Complex64, f64) {
        let direct: Complex64 = self.vals[..m].iter().sum();
        let (e, spread) = euler_sum(&self.vals[m..m + EULER_TERMS]);
        (direct + e, spread)
    }
}

fn piece_sign(phase: &dyn Phase, a: f64, b: Option<f64>) -> f64 {
    let probe = match b {
        Some(b) => 0.5 * (a + b),
        None => a + a.abs().max(1.0),
    };
    let s = phase.slope(probe);
    if s != 0.0 {
        return s.signum();
    }
    let anc = phase.anchor(a);
    phase.delta(&anc, b.unwrap_or(a + 1.0)).signum()
}

fn infinite_piece(
    phase: &dyn Phase,
    w: Weight,
    a: f64,
    tol: f64,
    budget: &mut usize,
) -> Result<Piece, PvError> {
    let sigma = piece_sign(phase, a, None);
    let mut s = Stream {
        walker: Walker::new(phase, w, a, 1.0, sigma, None, tol * 1e-3),
        vals: Vec::new(),
        errs: 0.0,
    };
    let mut m = FIRST_M;
    let mut prev: Option<Complex64> = None;
    loop {
        s.fill(m + EULER_TERMS, budget)?;
        let (est, spread) = s.estimate(m);
        if let Some(p) = prev {
            let diff = (est - p).norm();
            if diff <= tol && spread <= tol {
                return Ok(Piece {
                    value: est,
                    err: diff + spread + s.errs,
                    lobes: s.vals.len(),
                    radius: s.walker.t,
                    blocks: s.vals,
                });
            }
        }
        prev = Some(est);
        m *= 2;
    }
}

fn finite_piece(
    phase: &dyn Phase,
    w: Weight,
    a: f64,
    b: f64,
    tol: f64,
    budget: &mut usize,
) -> Result<Piece, PvError> {
    let sigma = piece_sign(phase, a, Some(b));
    let anc = phase.anchor(a);
    let span = phase.delta(&anc, b).abs();
    let blocks = (span / PI).min(1e18) as usize + 1;
    let block_tol = tol * 1e-3;
    if blocks > DIRECT_LIMIT {
        if let Some(p) = two_ended(phase, w, a, b, sigma, tol, block_tol, budget)? {
            return Ok(p);
        }
    }
    let mut walker = Walker::new(phase, w, a, 1.0, sigma, Some(b), block_tol);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut lobes = 0;
    while let Some((v, e)) = walker.next_block()? {
        if *budget == 0 {
            return Err(PvError::NotConverged {
                lobes,
                reason: "maximum lobe count reached".into(),
            });
        }
        *budget -= 1;
        value += v;
        err += e;
        lobes += 1;
    }
    Ok(Piece {
        value,
        err,
        lobes,
        radius: b,
        blocks: Vec::new(),
    })
}

/// Long finite piece: regularized sums from both ends.
#[allow(clippy::too_many_arguments)]
fn two_ended(
    phase: &dyn Phase,
    w: Weight,
    a: f64,
    b: f64,
    sigma: f64,
    tol: f64,
    block_tol: f64,
    budget: &mut usize,
) -> Result<Option<Piece>, PvError> {
    let mut fwd = Stream {
        walker: Walker::new(phase, w, a, 1.0, sigma, Some(b), block_tol),
        vals: Vec::new(),
        errs: 0.0,
    };
    let mut bwd = Stream {
        walker: Walker::new(phase, w, b, -1.0, -sigma, Some(a), block_tol),
        vals: Vec::new(),
        errs: 0.0,
    };
    let mut m = FIRST_M;
    let mut prev: Option<Complex64> = None;
    while 2 * (m + EULER_TERMS) + 2 < DIRECT_LIMIT {
        if !fwd.fill(m + EULER_TERMS, budget)? || !bwd.fill(m + EULER_TERMS, budget)? {
            return Ok(None);
        }
        let (ef, sf) = fwd.estimate(m);
        let (eb, sb) = bwd.estimate(m);
        let est = ef + eb;
        if let Some(p) = prev {
            let diff = (est - p).norm();
            if diff <= tol && sf + sb <= tol {
                return Ok(Some(Piece {
                    value: est,
                    err: diff + sf + sb + fwd.errs + bwd.errs,
                    lobes: fwd.vals.len() + bwd.vals.len(),
                    radius: b,
                    blocks: Vec::new(),
                }));
            }
        }
        prev = Some(est);
        m *= 2;
    }
    Ok(None)
}

/// `∫_a^b e^{iq(t)} w(t) dt` for `0 ≤ a < b ≤ ∞` (`b = None` is `∞`).
pub fn oscillatory(
    phase: &dyn Phase,
    w: Weight,
    a: f64,
    b: Option<f64>,
    opts: OscOptions,
) -> Result<OscResult, PvError> {
    if let Some(b) = b {
        if !(b > a) {
            return Ok(OscResult {
                radius: b,
                ..OscResult::default()
            });
        }
    }
    let hi = b.unwrap_or(f64::INFINITY);
    let mut cuts = vec![a];
    cuts.extend(phase.critical_points(a, hi)?);
    let mut cutoff = None;
    if b.is_none() {
        let t_star = phase.monotone_from(w)?;
        let last = *cuts.last().expect("nonempty");
        let c = if t_star > last { t_star } else { last };
        if c > last {
            cuts.push(c);
        }
        cutoff = Some(c);
    } else {
        cuts.push(hi);
    }
    let pieces = cuts.len() + 1;
    let piece_tol = opts.tol / pieces as f64;
    let mut budget = opts.max_lobes;
    let mut out = OscResult {
        cutoff,
        ..OscResult::default()
    };
    for win in cuts.windows(2) {
        let p = finite_piece(phase, w, win[0], win[1], piece_tol, &mut budget)?;
        out.value += p.value;
        out.abs_error += p.err;
        out.lobes += p.lobes;
        out.radius = out.radius.max(p.radius);
    }
    if b.is_none() {
        let start = *cuts.last().expect("nonempty");
        let p = infinite_piece(phase, w, start, piece_tol, &mut budget)?;
        out.value += p.value;
        out.abs_error += p.err;
        out.lobes += p.lobes;
        out.radius = out.radius.max(p.radius);
        out.tail_blocks = p.blocks;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::pvint::phase::PolyPhase;
    use crate::special::sine_integral;

    fn opts(tol: f64) -> OscOptions {
        OscOptions {
            tol,
            max_lobes: 1_000_000,
        }
    }

    #[test]
    fn euler_sums_alternating_harmonic() {
        let terms: Vec<Complex64> = (1..=24)
            .map(|j| Complex64::new(if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64, 0.0))
            .collect();
        let (v, _) = euler_sum(&terms);
        assert!((v.re - 2f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn sine_tail_from_one() {
        let ph = PolyPhase::new(&Poly::monomial(1), 128).unwrap();
        let r = oscillatory(&ph, Weight::InvT, 1.0, None, opts(1e-11)).unwrap();
        let want = PI / 2.0 - sine_integral(1.0);
        assert!(
            (r.value.im - want).abs() < 1e-10,
            "{} vs {want}",
            r.value.im
        );
    }

    #[test]
    fn long_finite_range_uses_both_ends() {
        // ∫_1^R e^{it} dt = (e^{iR} − e^{i}) / i
        let ph = PolyPhase::new(&Poly::monomial(1), 128).unwrap();
        let r_end = 1.0e5;
        let r = oscillatory(&ph, Weight::One, 1.0, Some(r_end), opts(1e-10)).unwrap();
        let want =
            (Complex64::from_polar(1.0, r_end) - Complex64::from_polar(1.0, 1.0)) / Complex64::i();
        assert!((r.value - want).norm() < 1e-9, "{} vs {want}", r.value);
        assert!(r.lobes < 1000);
    }

    #[test]
    fn stationary_point_inside() {
        // ∫_{-1}^{1}... only t ≥ 0 is supported; ∫_0^1 e^{i 50 t^2} dt against quadrature.
        let p = Poly::from_i64(&[0, 0, 50]);
        let ph = PolyPhase::new(&p, 128).unwrap();
        let r = oscillatory(&ph, Weight::One, 0.0, Some(1.0), opts(1e-12)).unwrap();
        let f = |t: f64| Complex64::from_polar(1.0, 50.0 * t * t);
        let q = integrate(&f, 0.0, 1.0, AdaptiveOptions::absolute(1e-13)).unwrap();
        assert!((r.value - q.value).norm() < 1e-11);
    }
}
