use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("scenario {path}: {message}")]
    Scenario { path: PathBuf, message: String },
    #[error("grid: {0}")]
    Grid(String),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}, row {row}: {message}")]
    SensorLog { path: PathBuf, row: usize, message: String },
    #[error("mean controller tick {mean_ms:.4} ms exceeds {limit_ms} ms")]
    BenchFailed { mean_ms: f64, limit_ms: f64 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Csv { .. } | Error::SensorLog { .. } => 1,
            Error::Config { .. } => 3,
            Error::Scenario { .. } | Error::Grid(_) => 4,
            Error::BenchFailed { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
