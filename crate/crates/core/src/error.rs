use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input length does not fit the operation.
    #[error("invalid arity: {0}")]
    Arity(String),

    /// A value fell outside its admissible domain (e.g. a score outside [0,1]).
    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Dataset ingestion failures, carrying row context where available.
    #[error("data error: {0}")]
    Data(String),

    #[error("malformed score matrix: {0}")]
    MalformedScores(String),

    #[error("feature error: {0}")]
    Feature(String),

    #[error("classifier is not fitted")]
    Unfitted,

    #[error("training failed: {0}")]
    Training(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
