//! Simulation of harmonizable fractional stable motion and Monte Carlo checks
//! of the law of large numbers and central limit theorem for its quadratic
//! variation.
//!
//! A realization is driven by a truncated LePage series for a complex
//! isotropic α-stable random measure on `[-M, M]` ([`levy::JumpMeasure`]).
//! Increments, the quadratic statistic, its random limit and the
//! Rosenblatt-type limit functional are then all computed on the same atoms
//! ([`harmonizable::CoupledRealization`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod harmonizable;
pub mod kernels;
pub mod levy;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use harmonizable::{CoupledRealization, IncrementSeries, Provenance};
pub use kernels::ModelParams;
pub use levy::JumpMeasure;
pub use rng::RngStream;
