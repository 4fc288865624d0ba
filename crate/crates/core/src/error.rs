use thiserror::Error;

use crate::lp::LpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid filtered space: {0}")]
    InvalidSpace(String),

    #[error("time index {t} out of range 0..={horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid stopping time: {0}")]
    InvalidStoppingTime(String),

    #[error("too large to enumerate: {count} candidates exceeds the bound {bound}")]
    TooLarge { count: f64, bound: usize },

    #[error("invalid seminorm spec: {0}")]
    InvalidSpec(String),

    #[error("process is not adapted: {0}")]
    NotAdapted(String),

    #[error("measure pair is not in the optional/predictable dual space: {0}")]
    NotInDual(String),

    #[error("negative entry {value} at atom {atom}")]
    Negative { atom: usize, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear program ended with status {0:?}")]
    Solver(LpStatus),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
