use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("covariance matrix is not numerically positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("all {restarts} hyperparameter restarts failed to factorize the covariance matrix")]
    AllRestartsFailed { restarts: usize },

    #[error("point outside domain: coordinate {index} = {value} not in [{lower}, {upper}]")]
    OutOfDomain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("logarithm argument {0} is not positive")]
    NonPositiveLogArgument(f64),

    #[error("problem `{0}` has no finite reference optimum")]
    NoFiniteOptimum(String),

    #[error("too few non-zero paired differences: {got} (need at least {need})")]
    TooFewPairs { got: usize, need: usize },

    #[error("pairing mismatch: method `{method}` has {got} repeats, expected {expected}")]
    PairingMismatch {
        method: String,
        got: usize,
        expected: usize,
    },

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
