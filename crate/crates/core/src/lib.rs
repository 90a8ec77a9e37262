//! Distributions of Lambert-W transformed chi-squared variables, their
//! linear combinations, and exact likelihood-ratio tests built on them.

pub mod config;
pub mod convolve;
pub mod error;
pub mod inference;
pub mod lwdist;
pub mod oracle;
pub mod specfun;

pub use config::Tolerances;
pub use error::{Error, Result};
