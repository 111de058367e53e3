use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("digit string {0} is not regular")]
    Irregular(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("characteristic polynomial has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: u64, hi: u64 },
    #[error("root finder did not converge: {0}")]
    NonConvergence(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("integrand is singular at point index {index}")]
    Singular { index: usize },
    #[error("empty input")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical refusal.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidCoefficients(_)
                | Error::Parse { .. }
                | Error::Irregular(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::EmptyInput
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
