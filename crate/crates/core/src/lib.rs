//! Variation seminorms of spherical means on the Hamming cube.

pub mod cli;
pub mod cube;
pub mod error;
pub mod krawtchouk;
pub mod experiments;
pub mod operators;
pub mod report;
pub mod rng;
pub mod variation;

pub use error::{Error, Result};
