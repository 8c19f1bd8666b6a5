//! Polar code forward error correction with a practical dynamic SC-Flip
//! (Fast-DSCF) decoder.
//!
//! The library covers the full decoding stack: code construction (5G-style
//! reliability sequence or Gaussian-approximation density evolution), polar
//! encoding with an outer CRC, min-sum SC and Fast-SSC decoding over a pruned
//! tree schedule, dynamic bit-flip scheduling with the `M_alpha` decision
//! metric, genie-aided oracle decoders, a saturating fixed-point hardware
//! datapath model, analytical FER bounds for Rate-1 and SPC nodes, and a
//! seeded Monte Carlo simulation harness.

pub mod analysis;
pub mod channel;
pub mod code;
pub mod metric;
pub mod quant;
pub mod sc;
pub mod schedule;
pub mod scheduler;
pub mod sequence;
pub mod sim;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code dimensions: {0}")]
    InvalidCode(String),
    #[error("reliability sequence only covers N <= {max}, requested N = {n}")]
    SequenceTooShort { n: usize, max: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("flip coordinate does not match node {ordinal}: {reason}")]
    FlipMismatch { ordinal: usize, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("quadrature failed to converge: estimated error {est:e} above tolerance {tol:e}")]
    QuadratureTolerance { est: f64, tol: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
