//! Principal-value oscillatory integrals `|p.v.∫ e^{iP(t)} dt/t|` with
//! polynomial phases, the extremal polynomials whose integrals grow like
//! `log d`, and the sublevel-set and Van der Corput estimates behind the
//! matching upper bound.

// Quadrature tables and reference constants are quoted at full published
// precision, and `!(x > 0.0)` deliberately rejects NaN along with non-positive
// values.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod discrepancy;
pub mod experiments;
pub mod extremal;
pub mod poly;
pub mod pvint;
pub mod quad;
pub mod special;
pub mod sublevel;
pub mod upperbound;
