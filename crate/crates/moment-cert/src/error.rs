use std::io;

use moment_cert_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("exact enumeration would visit {size} atoms (cap {cap})")]
    SupportExplosion { size: f64, cap: f64 },
    #[error("{0} has no finite support")]
    NotDiscrete(&'static str),
    #[error("no oracle can evaluate this input: {0}")]
    NoOracle(String),
    #[error("report and ground truth do not describe the same quantity: {0}")]
    Mismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
