use thiserror::Error;

/// Errors raised by the recovery library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The column-restricted system is numerically rank deficient.
    #[error("degenerate least-squares system on support {support:?} (|R_kk| = {pivot:e})")]
    DegenerateSystem { support: Vec<usize>, pivot: f64 },

    #[error("recovery failed: {0}")]
    RecoveryFailure(String),

    /// A theorem's hypotheses do not hold for the supplied parameters.
    #[error("outside the bound's regime: {0}")]
    OutOfRegime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
