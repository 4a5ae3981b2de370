use thiserror::Error;

use crate::instance::ValidationError;
use crate::milp::MilpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance failed validation with {} error(s); first: {}", .0.len(), .0.first().map(|e| e.to_string()).unwrap_or_default())]
    InvalidInstance(Vec<ValidationError>),

    #[error("invalid size specification: {0}")]
    InvalidSizeSpec(String),

    #[error("{0}")]
    Milp(#[from] MilpError),

    #[error("cannot decode solution: {0}")]
    Decode(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("week {week} failed: {reason}")]
    WeekFailed { week: usize, reason: String },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
