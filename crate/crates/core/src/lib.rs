//! Numerical verification of the nonlocal correlation between
//! `|ζ(1/2 + iφ(t)/2)|⁴` and `|ζ(1/2 + it)|²` along a constructed Jacob's
//! ladder `φ(t)`.
//!
//! The crate is organized bottom-up:
//!
//! * [`zeta`] evaluates the Hardy function `Z(t)` by the Riemann–Siegel
//!   formula and provides an Euler–Maclaurin reference evaluator.
//! * [`primes`] counts primes and holds the numerical constants.
//! * [`quadrature`] integrates oscillatory integrands on zero-gap sized
//!   Gauss–Legendre panels with a deterministic parallel reduction.
//! * [`ladder`] builds `φ(t)` from the cumulative integral of `Z²`.
//! * [`moments`] and [`correlation`] run the windowed experiments.

// `!(x < y)` is used on purpose throughout: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod ladder;
pub mod moments;
pub mod primes;
pub mod quadrature;
pub mod zeta;

pub use correlation::{
    CorrelationReport, MeanValuePoint, Prediction, SegmentGeometry, TransformCheck, TransformKind,
    WindowSpec,
};
pub use error::{Error, Result};
pub use ladder::{LadderMode, LadderModel, LadderPoint};
pub use moments::{MomentEstimate, MomentKind};
pub use primes::{constants, prime_pi, ConstantSet};
pub use quadrature::{CumulativeGrid, IntegralEstimate, Tolerance};
pub use zeta::{em_zeta_half, hardy_z, rs_theta, ZSample};
