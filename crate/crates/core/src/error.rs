use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported digit scheme")]
    UnsupportedDigitScheme,

    #[error("no significant digit in {0}")]
    NoSignificantDigit(f64),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid digit category {0}")]
    InvalidCategory(u8),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("contamination proportion {0} outside [0, 1]")]
    InvalidProportion(f64),

    #[error("sample size {n} is below the minimum of {min}")]
    InvalidSampleSize { n: u64, min: u64 },

    #[error("observed statistic {0} must be finite and non-negative")]
    InvalidObservation(f64),

    #[error("level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),

    #[error("replications ≥ {min} required, got {got}")]
    TooFewReplications { got: usize, min: usize },

    #[error("statistic {expected} expected, got {got}")]
    KindMismatch { expected: String, got: String },

    #[error("{method} critical values are not available for {kind}")]
    UnsupportedMethod { method: String, kind: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inversion bracket invalid: {0}")]
    InvalidBracket(String),

    #[error("maximum iterations exhausted; best bracket [{lo}, {hi}]")]
    MaxIterations { lo: f64, hi: f64 },

    #[error("required sample size exceeds search cap {cap}")]
    ExceedsSearchCap { cap: u64 },
}

impl Error {
    /// True for errors caused by bad caller input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::InvalidBracket(_) | Error::MaxIterations { .. } | Error::ExceedsSearchCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
