//! Bounds on rate-distortion functions and quantization errors for
//! regular measures, with Monte Carlo validation.

pub mod error;
pub mod quant_bounds;
pub mod quantizer_engine;
pub mod rd_bounds;
pub mod regularity;
pub mod report;
pub mod spaces;
pub mod special_functions;
pub mod stats;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
