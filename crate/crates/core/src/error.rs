use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("token id out of range: {id} (vocabulary size {size})")]
    TokenOutOfRange { id: u32, size: usize },

    #[error("no tokens")]
    NoTokens,

    #[error("index out of range: {index} (token count {len})")]
    IndexOutOfRange { index: i64, len: usize },

    #[error("model format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("unsupported model format version: expected {expected}, found {found}")]
    Version { expected: &'static str, found: String },

    #[error("model does not support {0} scoring")]
    Capability(&'static str),

    #[error("adapter timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("adapter protocol error: {0}")]
    Protocol(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("single-class training data: both labels are required")]
    SingleClass,

    #[error("non-finite feature value in example {0}")]
    NonFinite(usize),

    #[error("empty score list")]
    EmptyScores,

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
