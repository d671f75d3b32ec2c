use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record in an input file could not be parsed or failed validation.
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("sentence {sentence_id}: {message}")]
    Sentence {
        sentence_id: String,
        message: String,
    },

    #[error("unknown label {0:?} (expected PRO, CON or NON)")]
    UnknownLabel(String),

    #[error("unknown topic {0:?}")]
    UnknownTopic(String),

    #[error("prediction missing for sentence {0}")]
    MissingPrediction(String),

    #[error("length mismatch for sentence {sentence_id}: expected {expected} labels, got {actual}")]
    LengthMismatch {
        sentence_id: String,
        expected: usize,
        actual: usize,
    },

    #[error("agreement undefined: expected disagreement is zero (a single category is used throughout)")]
    UndefinedAgreement,

    #[error("malformed model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub(crate) fn sentence(sentence_id: &str, message: impl Into<String>) -> Self {
        Error::Sentence {
            sentence_id: sentence_id.to_string(),
            message: message.into(),
        }
    }
}
