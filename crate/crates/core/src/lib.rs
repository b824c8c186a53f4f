//! Tensor-network simulation of random quantum circuits on grid and
//! Bristlecone-style lattices.

pub mod amplitude;
pub mod analysis;
pub mod bits;
pub mod circuits;
pub mod error;
pub mod network;
pub mod oracle;
pub mod partition;
pub mod plan;
pub mod sampler;
pub mod tensor;

pub use error::{Error, Result};
