//! Phase functions for the oscillatory engine.
//!
//! A phase supplies its critical points, the point beyond which the weighted
//! amplitude is monotone, and anchored local differences `q(t) − q(t₀)` that
//! stay accurate when `q` itself is huge.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use crate::extremal::ExtremalPoly;
use crate::poly::{comp_horner, Poly};

use super::PvError;

/// Integration weight: `1/t` for principal-value kernels, `1` for plain
/// oscillatory integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    InvT,
    One,
}

impl Weight {
    pub(crate) fn at(self, t: f64) -> f64 {
        match self {
            Weight::InvT => 1.0 / t,
            Weight::One => 1.0,
        }
    }
}

/// Local expansion point: `q(t) = θ + δ(t) (mod 2π)`.
#[derive(Debug, Clone)]
pub struct Anchor {
    pub t0: f64,
    /// `q(t₀) mod 2π`, reduced in extended precision.
    pub theta: f64,
    coeffs: Vec<f64>,
}

pub trait Phase: Sync {
    /// `q(t)` in double precision; used only where `|q|` is moderate.
    fn eval(&self, t: f64) -> f64;
    fn slope(&self, t: f64) -> f64;
    fn anchor(&self, t0: f64) -> Anchor;
    /// `q(t) − q(a.t0)`.
    fn delta(&self, a: &Anchor, t: f64) -> f64;
    /// Sorted roots of `q'` strictly inside `(lo, hi)`; `hi` may be infinite.
    fn critical_points(&self, lo: f64, hi: f64) -> Result<Vec<f64>, PvError>;
    /// A point beyond which `q'` keeps its sign and `w/|q'|` is monotone.
    fn monotone_from(&self, w: Weight) -> Result<f64, PvError>;
}

fn largest(roots: &[f64]) -> f64 {
    roots.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn between(roots: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    roots
        .iter()
        .copied()
        .filter(|&r| r > lo && r < hi)
        .collect()
}

/// Polynomial phase backed by exact coefficients.
#[derive(Debug)]
pub struct PolyPhase {
    p: Poly,
    d1: Vec<f64>,
    bits: u64,
    crit: OnceLock<Result<Vec<f64>, PvError>>,
    t_inv: OnceLock<Result<f64, PvError>>,
    t_one: OnceLock<Result<f64, PvError>>,
}

impl PolyPhase {
    pub fn new(p: &Poly, bits: u64) -> Result<Self, PvError> {
        if p.degree() < 1 {
            return Err(PvError::ConstantPhase);
        }
        let p = p.to_exact();
        let d1 = p.derivative(1).float_coeffs().to_vec();
        Ok(Self {
            p,
            d1,
            bits,
            crit: OnceLock::new(),
            t_inv: OnceLock::new(),
            t_one: OnceLock::new(),
        })
    }

    pub fn poly(&self) -> &Poly {
        &self.p
    }

    fn roots_of(p: &Poly) -> Result<Vec<f64>, PvError> {
        if p.degree() < 1 {
            return Ok(Vec::new());
        }
        Ok(p.real_roots()?.values())
    }

    fn all_critical(&self) -> Result<&Vec<f64>, PvError> {
        self.crit
            .get_or_init(|| Self::roots_of(&self.p.derivative(1)))
            .as_ref()
            .map_err(Clone::clone)
    }
}

impl Phase for PolyPhase {
    fn eval(&self, t: f64) -> f64 {
        self.p.eval_fast(t)
    }

    fn slope(&self, t: f64) -> f64 {
        comp_horner(&self.d1, t)
    }

    fn anchor(&self, t0: f64) -> Anchor {
        let (theta, coeffs) = self.p.local_expansion(t0, self.bits);
        Anchor { t0, theta, coeffs }
    }

    fn delta(&self, a: &Anchor, t: f64) -> f64 {
        comp_horner(&a.coeffs, t - a.t0)
    }

    fn critical_points(&self, lo: f64, hi: f64) -> Result<Vec<f64>, PvError> {
        Ok(between(self.all_critical()?, lo, hi))
    }

    fn monotone_from(&self, w: Weight) -> Result<f64, PvError> {
        let cell = match w {
            Weight::InvT => &self.t_inv,
            Weight::One => &self.t_one,
        };
        cell.get_or_init(|| {
            let d1 = self.p.derivative(1);
            // For w = 1/t the amplitude is 1/(t q'), monotone once (t q')'
            // keeps its sign; for w = 1 it is 1/q', governed by q''.
            let second = match w {
                Weight::InvT => d1.mul_t().derivative(1),
                Weight::One => self.p.derivative(2),
            };
            let a = largest(self.all_critical()?);
            let b = largest(&Self::roots_of(&second)?);
            Ok(a.max(b).max(0.0))
        })
        .clone()
    }
}

/// The extremal polynomial `P_k`, evaluated in closed form with critical
/// points taken from its exact coefficients.
pub struct ExtremalPhase<'a> {
    e: &'a ExtremalPoly,
    bits: u64,
    crit: Vec<f64>,
    t_inv: f64,
    t_one: OnceLock<Result<f64, PvError>>,
}

impl<'a> ExtremalPhase<'a> {
    pub fn new(e: &'a ExtremalPoly, bits: u64) -> Result<Self, PvError> {
        let d1 = e.coeff_form.derivative(1);
        let crit = PolyPhase::roots_of(&d1)?;
        let second = PolyPhase::roots_of(&d1.mul_t().derivative(1))?;
        let t_inv = largest(&crit).max(largest(&second)).max(0.0);
        Ok(Self {
            e,
            bits,
            crit,
            t_inv,
            t_one: OnceLock::new(),
        })
    }
}

impl Phase for ExtremalPhase<'_> {
    fn eval(&self, t: f64) -> f64 {
        self.e.eval(t)
    }

    fn slope(&self, t: f64) -> f64 {
        self.e.derivative(t)
    }

    fn anchor(&self, t0: f64) -> Anchor {
        let theta = if t0.abs() <= 1.0 {
            self.e.eval(t0).rem_euclid(TAU)
        } else {
            self.e.coeff_form.phase_mod_two_pi(t0, self.bits)
        };
        Anchor {
            t0,
            theta,
            coeffs: Vec::new(),
        }
    }

    fn delta(&self, a: &Anchor, t: f64) -> f64 {
        self.e.difference(t, a.t0)
    }

    fn critical_points(&self, lo: f64, hi: f64) -> Result<Vec<f64>, PvError> {
        Ok(between(&self.crit, lo, hi))
    }

    fn monotone_from(&self, w: Weight) -> Result<f64, PvError> {
        match w {
            Weight::InvT => Ok(self.t_inv),
            Weight::One => self
                .t_one
                .get_or_init(|| {
                    let r = PolyPhase::roots_of(&self.e.coeff_form.derivative(2))?;
                    Ok(largest(&self.crit).max(largest(&r)).max(0.0))
                })
                .clone(),
        }
    }
}
