use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rate {name} = {value}: {reason}")]
    InvalidRate {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{0}")]
    Validation(ValidationReport),

    #[error("{what} = {value} exceeds the limit {limit}")]
    SizeGuard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("not supported by the analytic path: {0}")]
    Unsupported(String),

    #[error("degenerate mode: {0}")]
    DegenerateMode(String),

    #[error("secular equation has {found} roots in {intervals} brackets, expected {expected}")]
    RootCount {
        found: usize,
        expected: usize,
        intervals: usize,
        roots: Vec<f64>,
    },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("every gap candidate is zero")]
    DegenerateSpectrum,

    #[error("eigensolver did not converge (dimension {0})")]
    NoConvergence(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidRate { .. } | Error::Validation(_) | Error::Parse(_) | Error::Json(_) => 1,
            Error::SizeGuard { .. } => 3,
            _ => 2,
        }
    }
}
