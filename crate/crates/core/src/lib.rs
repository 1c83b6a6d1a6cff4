//! Simulation and verification toolkit for Hammersley's interacting particle
//! process, its stick representation and the Burgers hydrodynamic limit.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod hammersley;
pub mod increasing_seq;
pub mod piecewise;
pub mod poisson_plane;
pub mod stats;
pub mod sticks;

pub use error::{Error, Result};

/// Shortest decimal that round-trips to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
