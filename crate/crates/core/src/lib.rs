//! Quantum neural tangent kernels, random-data experiments and
//! generalization diagnostics for small statevector simulations.

pub mod analysis;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod linalg;
pub mod observable;
pub mod pauli;
pub mod qnn;
pub mod rng;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
