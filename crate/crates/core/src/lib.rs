//! Curve functionals on hyperbolic surfaces: surface words, hyperbolic
//! geometry, crossings and smoothings, length functionals, stabilization,
//! extremal length on graphs, and empirical checks.

pub(crate) mod axis_walk;
pub mod cli;
pub mod counting;
pub mod crossings;
pub mod elastic;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod hyperbolic;
pub mod stabilize;
pub mod words;

pub use error::{Error, Result};
