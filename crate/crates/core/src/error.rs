use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no cell center lies in ball (center {center:?}, radius {radius}); radius under-resolved")]
    UnderResolvedBall { center: [f64; 2], radius: f64 },
    #[error("time step {dt} exceeds stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("domain too small: support within guard band of the box edge at t={time}")]
    DomainTooSmall { time: f64 },
    #[error("non-finite value detected at t={time}")]
    NonFinite { time: f64 },
    #[error("point {point:?} at t={time} maps outside the sampled domain")]
    OutOfDomain { point: [f64; 2], time: f64 },
    #[error("regime violation: {0}")]
    Regime(String),
    #[error("bisection bracket failure: {0}")]
    Bracket(String),
    #[error("insufficient points: need at least {needed}, have {count}")]
    InsufficientPoints { needed: usize, count: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
