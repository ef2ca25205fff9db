//! Tree-ensemble kernel learning toolkit.
//!
//! Trains random forests and gradient boosted tree ensembles, extracts the
//! leaf co-occurrence kernels they induce, runs kernel ridge regression and
//! landmark (prototype) learning on those kernels, and measures
//! kernel-target alignment spectra. A replicated experiment harness ties
//! the pieces together for simulation and real-data studies.

pub mod alignment;
pub mod data;
pub mod dataio;
pub mod error;
pub mod gbt;
pub mod harness;
pub mod kernel;
pub mod krr;
pub mod landmark;
pub mod linalg;
pub mod matrix;
pub mod plot;
pub mod rf;
pub mod seed;
pub mod simgen;
pub mod tree;

pub use data::Dataset;
pub use error::{Error, Result};
pub use matrix::Mat;

/// RNG types appearing in public signatures, re-exported so downstream
/// crates need no direct rand_chacha dependency.
pub mod rng {
    pub use rand_chacha::rand_core::SeedableRng;
    pub use rand_chacha::ChaCha8Rng;
}
