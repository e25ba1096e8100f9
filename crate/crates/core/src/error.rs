use thiserror::Error;

/// Errors produced by the codecs, the analyzers and the verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlashError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("bit index {bit} out of range for k = {k}")]
    BitOutOfRange { bit: usize, k: usize },

    #[error("invalid block state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {left} cells vs {right} cells")]
    DimensionMismatch { left: usize, right: usize },

    /// A sub-block write was requested in a state the write rule does not accept.
    #[error("contract violation: {0}")]
    Contract(&'static str),

    #[error("invalid flip distribution: {0}")]
    InvalidDistribution(String),

    #[error("state space exceeds the cap of {cap} transitions; use the simulator instead")]
    StateCapExceeded { cap: usize },

    #[error(
        "stationary solve did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no erase intervals recorded")]
    EmptyStats,
}

pub type Result<T, E = FlashError> = std::result::Result<T, E>;
