use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate}, error {error:e})")]
    Quadrature { tol: f64, estimate: f64, error: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("empty contour: {0}")]
    EmptyContour(String),

    #[error("bandwidth must be below 1 for the extreme-value quantile (effective h = {0})")]
    BandwidthTooLarge(f64),

    #[error("too many skipped bootstrap replications: {skipped} of {total}")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("too many aborted runs: {aborted} of {total}")]
    TooManyAborted { aborted: usize, total: usize },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
