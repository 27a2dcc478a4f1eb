use thiserror::Error;

/// Errors raised by the entropy library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dressed branch must be 1 or 2, got {0}")]
    InvalidBranch(u8),

    #[error("invalid distribution: weight[{index}] = {value}")]
    InvalidDistribution { index: usize, value: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("truncation too small: n_max = {n_max}, {reason}")]
    TruncationTooSmall { n_max: usize, reason: String },

    #[error("truncation exceeds cap n_cap = {cap}: {diagnostic}")]
    TruncationExceedsCap { cap: usize, diagnostic: String },

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("small-time expansion undefined: {0}")]
    SmallTimeUndefined(String),

    #[error("entropy bound violated: {0}")]
    BoundViolation(String),

    #[error("marginal has off-diagonal coherence {magnitude:e} at ({row}, {col})")]
    OffDiagonalCoherence { row: usize, col: usize, magnitude: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
