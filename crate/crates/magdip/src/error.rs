use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::ScenarioError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// I/O failure, or an oracle comparison outside tolerance.
    pub const FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error("sweep point {index} ({axis} = {value:e}): {source}")]
    Point {
        index: usize,
        axis: &'static str,
        value: f64,
        #[source]
        source: magdip_core::Error,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("sweep point {index}: non-finite {quantity}")]
    NonFinite { index: usize, quantity: &'static str },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) | RunError::Invalid(_) => exit::VALIDATION,
            RunError::Point { source: magdip_core::Error::NonConvergence { .. }, .. } => exit::NON_CONVERGENCE,
            RunError::Point { .. } => exit::VALIDATION,
            RunError::NonFinite { .. } => exit::NON_CONVERGENCE,
            RunError::Io { .. } | RunError::Csv { .. } => exit::FAILURE,
        }
    }
}
