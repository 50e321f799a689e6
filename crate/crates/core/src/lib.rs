//! Symmetry-guided extrapolation (GUESS) and zero-noise extrapolation for
//! Trotterized spin chains, with an exact density-matrix simulator.

pub mod amplify;
pub mod dense;
pub mod error;
pub mod harness;
pub mod mitigate;
pub mod model;
pub mod pauli;
pub mod select;
pub mod sim;

pub use error::{Error, Result};
