use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model, grid or run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// The symplectic integrator left the energy-drift envelope.
    #[error("integration error at t = {time:.6}: relative energy drift {drift:.3e} exceeds tolerance {tolerance:.3e}")]
    Integration { time: f64, drift: f64, tolerance: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("solver failure: {0}")]
    Solver(String),

    /// A probe or state that the discretization cannot represent faithfully.
    #[error("rejected: {0}")]
    Rejected(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("plot error: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
