use std::io;

use thiserror::Error;

/// A failed (estimator, δ) cell inside one replicate.
#[derive(Debug, Error)]
#[error("estimator {estimator}, delta {delta}, stream {stream_id}: {source}")]
pub struct CellError {
    pub estimator: String,
    pub delta: f64,
    pub stream_id: u64,
    #[source]
    pub source: layered_hill::Error,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Core(#[from] layered_hill::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o failed: {0}")]
    Io(#[from] io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// Errors caused by the configuration rather than the data or the host.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Json(_))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
