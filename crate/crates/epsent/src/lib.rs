//! Coding-for-computing toolkit under a per-symbol distortion cap.
//!
//! Given finite alphabets, a joint pmf, a vector-valued function table and a
//! fidelity cap epsilon, the crate builds the characteristic hypergraph,
//! minimizes the conditional mutual information over hyperedge-supported
//! quantizers (the minimum achievable description rate), traces the
//! discontinuous rate curve, and ships two working codecs: a
//! quantize-plus-LZW pipeline for uniquely-clusterable instances and a
//! randomized-quantization polar codec for binary quantizers.

pub mod bits;
pub mod curve;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod hypergraph;
pub mod lzw;
pub mod model;
pub mod modular;
pub mod polar;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
