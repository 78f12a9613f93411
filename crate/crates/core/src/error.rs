use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("final state is unreachable (total score is -inf)")]
    NoPath,
    #[error("path enumeration exceeded the bound of {0} paths")]
    TooManyPaths(usize),
    #[error("target unit {unit} at position {position} is not a vocabulary token (vocab size {vocab_size})")]
    InvalidTarget {
        unit: u32,
        position: usize,
        vocab_size: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("joint row at (t={t}, u={u}) is not log-normalized: logsumexp = {lse}")]
    UnnormalizedRow { t: usize, u: usize, lse: f64 },
    #[error("skip-token mode {0} needs at least one label besides the target")]
    DegenerateVocabulary(&'static str),
    #[error("reference word count is zero")]
    EmptyReference,
    #[error("baseline degradation is zero, relative recovery is undefined")]
    DivisionByZero,
    #[error("non-finite loss on utterance {0}")]
    NonFiniteLoss(String),
    #[error("word {0:?} is not in the vocabulary")]
    UnknownWord(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
