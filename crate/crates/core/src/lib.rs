//! Bayesian power-prior and normalized-power-prior analysis of stratified
//! piecewise-exponential proportional hazards models, with simulation-based
//! sample-size determination.

pub mod cli;
pub mod data;
pub mod design;
pub mod error;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod samplers;
pub mod sim;

pub use error::{Error, Result};
