use thiserror::Error;

/// Errors raised by descriptor evaluation and the analyses built on it.
#[derive(Debug, Error)]
pub enum MetapError {
    #[error("point {point:?} lies outside the function domain")]
    Domain { point: Vec<f64> },
    #[error("translation by {shift:?} leaves the function domain")]
    TranslationLeavesDomain { shift: Vec<f64> },
    #[error("incompatible domains: {0}")]
    IncompatibleDomains(String),
    #[error("wrong descriptor kind: {0}")]
    Kind(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown corpus entry `{0}`")]
    UnknownCorpus(String),
    #[error("empty period set: relative density is unbounded on the scanned range")]
    EmptyPeriodSet,
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("malformed descriptor: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, MetapError>;

pub(crate) fn invalid(msg: impl Into<String>) -> MetapError {
    MetapError::InvalidParameter(msg.into())
}
