use thiserror::Error;

/// Errors raised by simulation, statistics and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid interval: end {end} must exceed start {start}")]
    Interval { start: f64, end: f64 },

    #[error("intensity {value} exceeds envelope bound {bound} at t = {t}")]
    Envelope { t: f64, value: f64, bound: f64 },

    #[error("branching factor {0} >= 1: the number of triggered events is unbounded")]
    UnboundedRegime(f64),

    #[error("kernel not supported by the simulator: {0}")]
    UnsupportedKernel(&'static str),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate test: {0}")]
    Degenerate(String),

    #[error("{} point(s) outside the grid region (indices {indices:?})", indices.len())]
    OutOfBounds { indices: Vec<usize> },

    #[error("grid shapes differ")]
    Shape,

    #[error("invalid baseline: {0}")]
    Baseline(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}
