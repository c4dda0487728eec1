use crate::path::Side;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("density `{density}` is not strictly positive at x = {at}")]
    Domain { density: String, at: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{side} side did not fall below its running max within {max_events} events")]
    Truncation { side: Side, max_events: usize },

    #[error("x = {x} lies outside the sampled horizon [{lo}, {hi}]")]
    OutOfHorizon { x: f64, lo: f64, hi: f64 },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("all {reps} replications failed for gamma = {gamma}")]
    CellFailed { gamma: f64, reps: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
