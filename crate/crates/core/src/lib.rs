//! Edge-differentially-private spectral graph clustering.
//!
//! This crate holds the allocation-only numerical core: graph representation
//! and SBM sampling, privacy calibration for the three mechanisms (randomized
//! response with shuffling, projected Gaussian sketch, noisy power method),
//! the mechanisms themselves, a small dense spectral layer, k-means, the
//! permutation-invariant error rate and closed-form error-bound evaluators.
//!
//! It is `no_std` and only needs `alloc`. File formats, the experiment
//! harness and the CLI live in the `dpspec` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod accounting;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod kmeans;
pub mod mechanisms;
pub mod metrics;
pub mod rng;
pub mod spectral;

mod math;

pub use error::{Error, Result};
pub use nalgebra;
