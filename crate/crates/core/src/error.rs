use thiserror::Error;

/// Failure classes, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A statistical or numerical failure on otherwise valid input.
    Domain,
    /// Malformed or unreadable input data.
    Parse,
    /// A caller-supplied argument violates a precondition.
    InvalidArgument,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },
    #[error("non-positive price at line {line}")]
    NonPositivePrice { line: u64 },
    #[error("non-increasing timestamp at line {line}")]
    NonIncreasingTimestamp { line: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("resampling to {target} leaves {buckets} bucket(s); at least 2 are required")]
    SpanTooShort { target: String, buckets: usize },
    #[error("cannot resample a {from} series to the finer timescale {to}")]
    ResampleToFiner { from: String, to: String },
    #[error("non-finite gradient at theta = {theta}")]
    NonFiniteGradient { theta: f64 },
    #[error("no accepted states after burn-in")]
    NoAcceptedStates,
    #[error("degenerate evidence: every prior draw has zero likelihood")]
    DegenerateEvidence,
    #[error("Bayes factor is not finite (log Bayes factor = {log_bf})")]
    NonFiniteBayesFactor { log_bf: f64 },
    #[error("quadrature did not reach tolerance {tol:e} within {budget} nodes (last estimate {estimate})")]
    QuadratureBudget { tol: f64, budget: usize, estimate: f64 },
    #[error("price overflow at index {index}")]
    PriceOverflow { index: usize },
    #[error("zero-variance series")]
    ZeroVariance,
    #[error("singular regression matrix")]
    SingularRegression,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EmptyInput
            | Error::Malformed { .. }
            | Error::NonPositivePrice { .. }
            | Error::NonIncreasingTimestamp { .. } => ErrorClass::Parse,
            Error::InvalidArgument(_) => ErrorClass::InvalidArgument,
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
