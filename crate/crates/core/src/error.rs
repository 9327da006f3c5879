use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image decode error: {0}")]
    Decode(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("unknown augmentation `{0}`")]
    UnknownAugmentation(String),

    #[error("unknown search space `{0}`")]
    UnknownSpace(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("all group probabilities are zero")]
    DegenerateProbabilities,

    #[error("search budget of {0} evaluations exhausted")]
    BudgetExhausted(usize),

    #[error("unknown trial id {0}")]
    UnknownTrial(u64),

    #[error("trial {0} already reported")]
    DuplicateReport(u64),

    #[error("no completed trials")]
    NoCompletedTrials,

    #[error("insufficient trials: need at least {needed}, have {have}")]
    InsufficientTrials { needed: usize, have: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
