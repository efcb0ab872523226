use alloc::string::String;

/// Errors raised by the core engines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid moment profile: {0}")]
    InvalidProfile(String),
    #[error("moment of order {requested} requested but only order {available} is available")]
    InsufficientOrder { requested: usize, available: usize },
    #[error("no characteristic function available for a raw moment specification")]
    NoCharFunction,
    #[error("raw moment specifications cannot be sampled")]
    NotSamplable,
    #[error("moment profile is not centered")]
    NotCentered,
    #[error("input is not symmetric")]
    NotSymmetric,
    #[error("{0}")]
    OutOfRange(String),
    #[error(
        "{n} variables exceed the enumeration cap of {cap}; use the Monte Carlo oracle instead"
    )]
    EnumerationCap { n: usize, cap: usize },
    #[error("variance dynamic range {0:e} exceeds 1e8")]
    DynamicRange(f64),
    #[error("weights are not sorted by nonincreasing magnitude")]
    Unsorted,
    #[error("parts sum to {got}, expected {expected}")]
    TotalMismatch { expected: u64, got: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
