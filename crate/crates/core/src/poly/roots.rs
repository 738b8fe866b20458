//! Real-root isolation by Descartes sign-variation bisection on the
//! squarefree part, followed by exact-sign bisection refinement.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::int::{dyadic, IntPoly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolatedRoot {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Real roots in a query interval, sorted, each reported once.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RootList {
    pub roots: Vec<IsolatedRoot>,
}

impl RootList {
    pub fn len(&self) -> usize {
        self.roots.len()
    }
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// A subinterval `(k/2^j, (k+1)/2^j)` of the unit interval, or an exact root
/// at `k/2^j`.
enum Unit {
    Open { k: BigInt, j: u64 },
    Exact { k: BigInt, j: u64 },
}

/// Roots of the squarefree integer polynomial `g` in the open unit interval.
fn isolate_unit(g: IntPoly) -> Vec<Unit> {
    let mut out = Vec::new();
    let mut stack = vec![(g, BigInt::zero(), 0u64)];
    while let Some((g, k, j)) = stack.pop() {
        if !g.degree().is_some_and(|d| d >= 1) {
            continue;
        }
        let v = g.reversed().taylor_shift(&BigInt::one()).sign_variations();
        if v == 0 {
            continue;
        }
        if v == 1 {
            out.push(Unit::Open { k, j });
            continue;
        }
        // Split at 1/2.
        let left = g.shrink_pow2(1);
        let mut right = left.taylor_shift(&BigInt::one());
        let k2 = &k << 1usize;
        if right.c[0].is_zero() {
            out.push(Unit::Exact {
                k: &k2 + 1,
                j: j + 1,
            });
            right = IntPoly::new(right.c[1..].to_vec());
        }
        stack.push((right.primitive(), &k2 + 1, j + 1));
        stack.push((left.primitive(), k2, j + 1));
    }
    out
}

/// Maps the unit interval onto `[lo, hi]` exactly: `t = (L + W x) / 2^s`.
struct Frame {
    l: BigInt,
    w: BigInt,
    s: u64,
}

impl Frame {
    fn new(lo: f64, hi: f64) -> Self {
        let (ml, el) = dyadic(lo);
        let (mh, eh) = dyadic(hi);
        let el = if ml.is_zero() { eh } else { el };
        let eh = if mh.is_zero() { el } else { eh };
        let e = el.min(eh);
        let l = ml << (el - e) as usize;
        let h = mh << (eh - e) as usize;
        if e >= 0 {
            let l = l << e as usize;
            let h = h << e as usize;
            Frame { w: h - &l, l, s: 0 }
        } else {
            Frame {
                w: h - &l,
                l,
                s: (-e) as u64,
            }
        }
    }

    /// `t` for `x = num / 2^j`.
    fn point(&self, num: &BigInt, j: u64) -> BigRational {
        let n = (&self.l << j as usize) + &self.w * num;
        BigRational::new(n, BigInt::one() << (self.s + j) as usize)
    }

    fn unit_poly(&self, f: &IntPoly) -> IntPoly {
        f.shrink_pow2(self.s)
            .taylor_shift(&self.l)
            .scale(&self.w)
            .primitive()
    }
}

fn to_f64(q: &BigRational) -> f64 {
    super::int::ratio_to_f64(q.numer(), q.denom())
}

/// Isolates and refines all real roots of `f` in `[lo, hi]`.
///
/// `f` must be nonzero. Roots are refined by exact-sign bisection until the
/// isolating interval is narrower than `width` (or adjacent doubles).
pub(crate) fn isolate(f: &IntPoly, lo: f64, hi: f64, width: f64) -> RootList {
    assert!(!f.is_zero());
    assert!(lo <= hi);
    let mut roots = Vec::new();
    if f.degree() == Some(0) {
        return RootList { roots };
    }
    let sq = f.squarefree();
    for &end in &[lo, hi] {
        if sq.sign_at(end) == Sign::NoSign && roots.iter().all(|r: &IsolatedRoot| r.value != end) {
            roots.push(IsolatedRoot {
                lo: end,
                hi: end,
                value: end,
            });
        }
    }
    if lo < hi {
        let frame = Frame::new(lo, hi);
        let g = frame.unit_poly(&sq);
        for u in isolate_unit(g) {
            match u {
                Unit::Exact { k, j } => {
                    let t = to_f64(&frame.point(&k, j));
                    roots.push(IsolatedRoot {
                        lo: t,
                        hi: t,
                        value: t,
                    });
                }
                Unit::Open { k, j } => roots.push(refine(&sq, &frame, k, j, width)),
            }
        }
    }
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots.dedup_by(|a, b| a.value == b.value);
    RootList { roots }
}

fn sign_at_rational(f: &IntPoly, q: &BigRational) -> Sign {
    // q = n / 2^s exactly (dyadic denominators only).
    let den = q.denom();
    let s = den.bits() - 1;
    debug_assert!(den == &(BigInt::one() << s as usize));
    f.eval_dyadic(q.numer(), s).sign()
}

fn refine(f: &IntPoly, frame: &Frame, k: BigInt, j: u64, width: f64) -> IsolatedRoot {
    let mut k = k;
    let mut j = j;
    let mut a = frame.point(&k, j);
    let mut b = frame.point(&(&k + 1), j);
    let sa = sign_at_rational(f, &a);
    loop {
        let af = to_f64(&a);
        let bf = to_f64(&b);
        let mid = (af + bf) * 0.5;
        if bf - af <= width || mid <= af || mid >= bf {
            return IsolatedRoot {
                lo: af,
                hi: bf,
                value: mid.clamp(af, bf),
            };
        }
        k <<= 1usize;
        j += 1;
        let m = frame.point(&(&k + 1), j);
        let sm = sign_at_rational(f, &m);
        if sm == Sign::NoSign {
            let t = to_f64(&m);
            return IsolatedRoot {
                lo: t,
                hi: t,
                value: t,
            };
        }
        if sm == sa {
            k += 1;
            a = m;
        } else {
            b = m;
        }
    }
}

/// Upper bound on the modulus of every complex root (Fujiwara).
pub(crate) fn root_bound(f: &IntPoly) -> f64 {
    let d = match f.degree() {
        Some(d) if d >= 1 => d,
        _ => return 0.0,
    };
    let ln_lead = crate::special::ln_bigint(&num_traits::Signed::abs(f.lead()));
    let mut best = f64::NEG_INFINITY;
    for i in 1..=d {
        let c = &f.c[d - i];
        if c.is_zero() {
            continue;
        }
        let mut ln_ratio = crate::special::ln_bigint(&num_traits::Signed::abs(c)) - ln_lead;
        if i == d {
            ln_ratio -= std::f64::consts::LN_2;
        }
        best = best.max(ln_ratio / i as f64);
    }
    if best == f64::NEG_INFINITY {
        return 0.0;
    }
    2.0 * best.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn sqrt_two() {
        let r = isolate(&ip(&[-2, 0, 1]), 0.0, 2.0, 1e-14);
        assert_eq!(r.len(), 1);
        assert!((r.roots[0].value - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn no_real_roots() {
        assert!(isolate(&ip(&[1, 0, 1]), -10.0, 10.0, 1e-14).is_empty());
    }

    #[test]
    fn endpoint_and_midpoint_roots() {
        // x (x - 1)(x + 1) on [-1, 1]: roots at both endpoints and the centre.
        let r = isolate(&ip(&[0, -1, 0, 1]), -1.0, 1.0, 1e-14);
        assert_eq!(r.values(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn repeated_root_reported_once() {
        // (x - 0.5)^3 scaled: (2x - 1)^3 = 8x^3 - 12x^2 + 6x - 1
        let r = isolate(&ip(&[-1, 6, -12, 8]), 0.0, 1.0, 1e-14);
        assert_eq!(r.len(), 1);
        assert!((r.roots[0].value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn clustered_roots() {
        // (x - 1)(x - 1 - 2^-30)
        let a = BigInt::one() << 30usize;
        let p = IntPoly::new(vec![&a + 1u32, -(&a * 2u32 + 1u32), a.clone()]);
        let r = isolate(&p, 0.0, 2.0, 1e-15);
        assert_eq!(r.len(), 2);
        assert!((r.roots[1].value - r.roots[0].value - 2f64.powi(-30)).abs() < 1e-14);
    }

    #[test]
    fn bound_contains_roots() {
        // roots 3, -5, 7
        let p = ip(&[105, -29, -5, 1]);
        assert!(root_bound(&p) >= 7.0);
    }
}
