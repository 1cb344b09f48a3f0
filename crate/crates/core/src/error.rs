use thiserror::Error;

use crate::pathing::Path;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scene, grid or camera violates one of its invariants.
    #[error("invalid scene: {0}")]
    Validation(String),

    /// A solver or optimizer option is out of range.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no path from ({x}, {y}) to the destination")]
    Unreachable { x: f64, y: f64 },

    /// Characteristic descent ran out of steps. Carries what was traced so far.
    #[error("path extraction did not converge after {steps} steps")]
    NonConvergence { steps: usize, partial: Box<Path> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
