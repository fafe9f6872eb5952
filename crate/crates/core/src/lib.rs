//! Adjustment coefficient, excess constants and Lundberg-type bounds for
//! random walks whose increments have positive mean and a light left tail.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; randomness is always supplied by the caller, and the
//! Monte Carlo drivers delegate chunk scheduling to a [`ChunkRunner`] so a
//! std front end can run them in parallel without changing results.
//!
//! [`ChunkRunner`]: montecarlo::ChunkRunner
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adjustment;
pub mod bounds;
pub mod distributions;
pub mod embedding;
mod error;
pub mod excess;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use adjustment::{adjustment_coefficient, gaussian_rate, AdjustmentResult};
pub use distributions::{Distribution, DistributionSpec, Family};
pub use error::{Error, Result, Side};
pub use excess::{excess_constants, ExcessConstants};
