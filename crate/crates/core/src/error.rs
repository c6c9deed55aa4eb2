use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum PeerlabError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("environment episode is finished; call reset before stepping")]
    EpisodeDone,

    #[error("undefined state: {0}")]
    UndefinedState(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("malformed csv {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = PeerlabError> = std::result::Result<T, E>;

impl PeerlabError {
    /// True for errors caused by user-supplied configuration rather than a
    /// failure while running.
    pub fn is_config_error(&self) -> bool {
        matches!(self, PeerlabError::InvalidConfig(_))
    }
}
