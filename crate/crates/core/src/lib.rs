//! Classical escape rates and quantum smoothing constants for Schrödinger
//! operators `P = −½Δ + V` with sub-quadratic confining potentials.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the double-precision types used by the command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod potential;
pub mod quantum;
pub mod refine;
pub mod report;
pub mod scalar;
pub mod wavepacket;
pub mod weyl;

pub use error::{Error, Result};
pub use potential::{PhasePoint, PotentialKind, PotentialModel};
pub use scalar::Real;

pub type Potential = PotentialModel<f64>;
pub type Point = PhasePoint<f64>;
pub type Potential32 = PotentialModel<f32>;
pub type Point32 = PhasePoint<f32>;
