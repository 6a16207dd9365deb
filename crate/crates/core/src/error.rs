use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0} is reserved but not implemented")]
    Unsupported(&'static str),

    #[error("exp(χE) out of range: |χ·E| = {magnitude:.1} exceeds {limit}")]
    Overflow { magnitude: f64, limit: f64 },

    #[error("polar factor of member {member} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Orthogonalization {
        member: u64,
        iterations: usize,
        residual: f64,
    },

    #[error("operator support is empty")]
    EmptySupport,

    #[error("moment order {k} outside supported range 1..={max}")]
    OrderOutOfRange { k: usize, max: usize },

    #[error("{failed} of {total} ensemble members failed (first: {first})")]
    RunFailed {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
