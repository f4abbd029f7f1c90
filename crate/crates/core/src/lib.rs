//! Numerical laboratory for soliton shielding: exact N-soliton solutions of
//! the focusing NLS equation built from discretised spectral densities.

pub mod config;
pub mod domains;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
