//! Numerical laboratory for critical elliptic systems.
//!
//! The crate evaluates a small catalog of vector fields with exact derivative
//! stacks up to order four (singular sphere-valued maps, fundamental solutions,
//! harmonic/biharmonic polynomial corpora), computes Lorentz-space norms via
//! decreasing rearrangement, runs adaptive radial quadrature with divergence
//! detection at the origin, verifies pointwise and weak-form PDE residuals,
//! and produces regularity diagnostics: Morrey subnorm scans, Lorentz ball-decay
//! experiments, oscillation scans and Sobolev membership tables at the critical
//! exponent.
//!
//! Everything is a pure function of its inputs; field values are immutable
//! after construction and safe to share across threads.

// negated float comparisons like !(x > 0.0) are deliberate: they reject NaN
// along with the out-of-range values, which x <= 0.0 would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod lab;
pub mod profile;
pub mod quadrature;
pub mod rearrange;
pub mod report;
pub mod residual;
pub mod special;
pub mod tol;

pub use error::{Error, Result};
