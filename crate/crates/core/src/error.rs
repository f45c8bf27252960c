use thiserror::Error;

/// Errors produced by the simulator and its harness.
#[derive(Debug, Error)]
pub enum OrchidError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("topology generation failed: {0}")]
    Topology(String),

    #[error("secret sharing: {0}")]
    SecretSharing(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OrchidError>;
