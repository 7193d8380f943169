//! Data-selective Volterra NLMS adaptive filtering with per-iteration
//! robustness bookkeeping.

pub mod error;
pub mod filters;
pub mod harness;
pub mod robustness;
pub mod signals;
pub mod special;
pub mod volterra;

pub use error::{Error, Result};
