use thiserror::Error;

/// Errors produced by the statistics and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data carry no variation where some is required (e.g. a median
    /// bandwidth of zero, or a spectrum with no nonzero eigenvalue).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sample size {n} is too small, at least {min} observations are required")]
    SmallSample { n: usize, min: usize },

    /// The requested computation path does not apply to this input, e.g. the
    /// one-dimensional fast path on multivariate data.
    #[error("unsupported path: {0}")]
    UnsupportedPath(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
