//! Detection models: anything that yields a full next-token distribution.
//!
//! The built-in backend is an interpolated Kneser-Ney n-gram model
//! ([`NGramModel`]); [`RemoteModel`] wraps an external language model served
//! over HTTP. Both implement [`DetectionModel`].

mod distribution;
mod format;
mod ngram;
mod remote;
mod sampling;
mod vocab;

use serde::{Deserialize, Serialize};

pub use distribution::Distribution;
pub use format::{load_model, read_model, save_model, write_model, FORMAT_MAGIC, FORMAT_VERSION};
pub use ngram::{train_ngram, NGramModel, TrainConfig};
pub use remote::{AdapterInfo, RemoteModel, RemotePrediction, DEFAULT_TIMEOUT, MASK_TOKEN};
pub use sampling::{effective_distribution, sample, sample_step, SamplingConfig};
pub use vocab::{TokenId, Vocabulary, BOS, EOS, UNK};

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 30;

/// Causal (left context only) or masked (context on both sides) scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScoringMode {
    #[default]
    Causal,
    Masked { window: usize },
}

impl ScoringMode {
    pub fn masked(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::param("masked window must be at least 1"));
        }
        Ok(ScoringMode::Masked { window })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoringMode::Causal => "causal",
            ScoringMode::Masked { .. } => "masked",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScoringMode::Masked { window: 0 } => {
                Err(Error::param("masked window must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub kind: ModelKind,
    pub causal: bool,
    pub masked: bool,
    pub vocab_size: usize,
    pub case_folded: bool,
}

/// A tokenized document as seen by a detection model: vocabulary ids aligned
/// with the surface strings they came from.
#[derive(Debug, Clone, Copy)]
pub struct Sequence<'a> {
    pub ids: &'a [TokenId],
    pub texts: &'a [String],
}

pub trait DetectionModel: Send + Sync {
    fn info(&self) -> ModelInfo;

    fn vocabulary(&self) -> &Vocabulary;

    /// Distribution over the vocabulary for position `target` of `seq`.
    ///
    /// Causal mode conditions on `seq[..target]`; masked mode conditions on
    /// up to `window` tokens on each side of `target`. `target == seq.len()`
    /// asks for the continuation of the whole sequence.
    fn predict(&self, seq: Sequence<'_>, target: usize, mode: ScoringMode) -> Result<Distribution>;
}
