use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("circulant embedding is not nonnegative-definite: eigenvalue {eigenvalue:e} (max {max:e})")]
    Embedding { eigenvalue: f64, max: f64 },

    #[error("fit range error: {0}")]
    FitRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient local-time mass: {excluded} of {total} paths excluded")]
    InsufficientMass { excluded: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("path {index}: {source}")]
    Path {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("too many failed paths: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "hurst index must lie in (0, 1), got {hurst}"
        )))
    }
}
