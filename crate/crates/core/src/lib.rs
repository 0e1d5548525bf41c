//! Finite-volume interface capturing on uniform Cartesian grids.
//!
//! The crate provides the classical direction-by-direction MUSCL slope-limited
//! advection scheme alongside the multidimensional limiting process (MLP)
//! with two-stage Runge–Kutta time integration, a set of standard interface
//! transport benchmarks, and a multimaterial remap step built on the same
//! reconstruction.

pub mod cases;
pub mod diagnostics;
pub mod error;
pub mod flowfields;
pub mod grid;
pub mod integrate;
pub mod limiters1d;
pub mod mlp;
pub mod multimat;
pub mod study;

pub use error::{IcapError, Result};
