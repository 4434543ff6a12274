use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("instance too large for vertex enumeration: {0}")]
    TooLarge(String),

    #[error("solution is not optimal (status {0})")]
    NotOptimal(String),

    #[error("sample {index} yields an infeasible instance")]
    SampleInfeasible { index: u64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("network is disconnected: {0}")]
    DisconnectedNetwork(String),

    #[error("reduced susceptance matrix is singular")]
    SingularSusceptance,

    #[error("injections do not balance (sum = {0})")]
    UnbalancedInjection(f64),

    #[error("invalid discovery configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("snapshot does not match this run: {0}")]
    SnapshotMismatch(String),

    #[error("active-set collection is empty")]
    EmptyCollection,

    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("unknown key {0}")]
    UnknownKey(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
