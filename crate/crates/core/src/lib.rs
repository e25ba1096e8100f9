//! Index-less indexed flash codes for write-asymmetric memory.
//!
//! Two rewriting codes store a `k`-bit information vector in an erase block
//! of `n` cells with `q` levels each: the first-stage index-less indexed
//! flash code ([`Ilifc`]) and its layered variant ([`Layered`]), which lets
//! a sub-block drop its index once a layer is complete. Around them:
//!
//! - [`sim`]: seeded Monte-Carlo rewriting simulation,
//! - [`markov`]: exact average performance from the reachable-state chain,
//!   generic over the probability scalar ([`Scalar`]),
//! - [`verify`]: brute-force consistency, decodability and worst-case oracles.

pub mod code;
pub mod dist;
pub mod error;
pub mod ilifc;
pub mod layered;
pub mod markov;
pub mod model;
pub mod scalar;
pub mod sim;
pub mod verify;

pub use code::{CodeKind, Codec, EncodeOutcome, FlashCode, Step};
pub use dist::FlipDistribution;
pub use error::{FlashError, Result};
pub use ilifc::Ilifc;
pub use layered::Layered;
pub use markov::{ChainModel, StationaryResult};
pub use model::{BlockState, CodeParams, InfoVector, SubBlock, SubBlockStatus};
pub use scalar::Scalar;
pub use sim::{RunConfig, RunStats};

pub use num_rational::BigRational;

/// Exact rational probabilities.
pub type Exact = BigRational;

pub type FlipDistributionF64 = FlipDistribution<f64>;
pub type FlipDistributionExact = FlipDistribution<Exact>;
pub type ChainModelF64 = ChainModel<f64>;
pub type ChainModelExact = ChainModel<Exact>;
pub type StationaryF64 = StationaryResult<f64>;
pub type StationaryExact = StationaryResult<Exact>;
