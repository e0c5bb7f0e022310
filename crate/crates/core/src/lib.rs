//! Biased random walks on regular trees and free products of complete graphs.
//!
//! The λ-biased walk puts conductance `λ^-n` on every edge at distance `n`
//! from the root. This crate computes its spectral radius, speed, return
//! probabilities and growth rates three independent ways: closed forms,
//! fixed-point solvers on the first-return generating function, and exact
//! dynamic programming on the lumped (level, type) chain. Path simulation on
//! word addresses provides a fourth, stochastic, route.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the parallel drivers live in the `walkspec` companion crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod closed_form;
mod error;
pub mod fixed_point;
pub mod kernel;
mod math;
pub mod model;
pub mod montecarlo;
pub mod series;

pub use error::{Error, Result};
pub use kernel::{QState, QuotientChain, TransitionRow};
pub use model::{GraphModel, Letter, LevelDegrees, LevelDelta, VertexAddr};
pub use series::SeriesTable;
