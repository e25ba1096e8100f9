//! Common surface shared by both codecs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FlashError, Result};
use crate::ilifc::Ilifc;
use crate::layered::Layered;
use crate::model::{BlockState, CodeParams, InfoVector};

/// Result of one rewrite attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodeOutcome {
    /// The flip was absorbed; the block moved to a higher state.
    Written(BlockState),
    /// No sub-block can take the flip; the block must be erased.
    Erase,
}

/// In-place counterpart of [`EncodeOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Written,
    Erase,
}

/// A rewriting code over one erase block.
pub trait FlashCode {
    fn params(&self) -> &CodeParams;

    /// Reads the information vector stored in `state`.
    fn decode(&self, state: &BlockState) -> InfoVector;

    /// Records a flip of `bit` by programming one cell of `state`.
    /// On [`Step::Erase`] the state is left untouched.
    fn write_flip(&self, state: &mut BlockState, bit: usize) -> Result<Step>;

    fn encode_flip(&self, state: &BlockState, bit: usize) -> Result<EncodeOutcome> {
        let mut next = state.clone();
        Ok(match self.write_flip(&mut next, bit)? {
            Step::Written => EncodeOutcome::Written(next),
            Step::Erase => EncodeOutcome::Erase,
        })
    }
}

impl<C: FlashCode + ?Sized> FlashCode for &C {
    fn params(&self) -> &CodeParams {
        (**self).params()
    }

    fn decode(&self, state: &BlockState) -> InfoVector {
        (**self).decode(state)
    }

    fn write_flip(&self, state: &mut BlockState, bit: usize) -> Result<Step> {
        (**self).write_flip(state, bit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Ilifc,
    Layered,
}

impl CodeKind {
    pub const ALL: [CodeKind; 2] = [CodeKind::Ilifc, CodeKind::Layered];

    pub fn codec(self, params: CodeParams) -> Codec {
        match self {
            CodeKind::Ilifc => Codec::Ilifc(Ilifc::new(params)),
            CodeKind::Layered => Codec::Layered(Layered::new(params)),
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeKind::Ilifc => "ilifc",
            CodeKind::Layered => "layered",
        })
    }
}

impl FromStr for CodeKind {
    type Err = FlashError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ilifc" => Ok(CodeKind::Ilifc),
            "layered" | "l-ilifc" => Ok(CodeKind::Layered),
            other => Err(FlashError::InvalidParams(format!("unknown code {other:?}"))),
        }
    }
}

/// Either codec behind static dispatch.
#[derive(Debug, Clone)]
pub enum Codec {
    Ilifc(Ilifc),
    Layered(Layered),
}

impl Codec {
    pub fn kind(&self) -> CodeKind {
        match self {
            Codec::Ilifc(_) => CodeKind::Ilifc,
            Codec::Layered(_) => CodeKind::Layered,
        }
    }
}

impl FlashCode for Codec {
    fn params(&self) -> &CodeParams {
        match self {
            Codec::Ilifc(c) => c.params(),
            Codec::Layered(c) => c.params(),
        }
    }

    fn decode(&self, state: &BlockState) -> InfoVector {
        match self {
            Codec::Ilifc(c) => c.decode(state),
            Codec::Layered(c) => c.decode(state),
        }
    }

    fn write_flip(&self, state: &mut BlockState, bit: usize) -> Result<Step> {
        match self {
            Codec::Ilifc(c) => c.write_flip(state, bit),
            Codec::Layered(c) => c.write_flip(state, bit),
        }
    }
}
