//! Correlation structure of photon pairs from degenerate collinear
//! spontaneous parametric down-conversion.

pub mod coherence;
pub mod error;
pub mod experiment;
pub mod exec;
pub mod gaussfit;
pub mod model;
pub mod numerics;
pub mod propagation;
pub mod temporal;

pub use error::{Error, Result};
pub use exec::Execution;
