use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error("integration blew up at t = {time}{}", step.map(|s| format!(" (step {s})")).unwrap_or_default())]
    Blowup { time: f64, step: Option<usize> },

    #[error("series grids differ: {0}")]
    GridMismatch(String),

    #[error("not enough reference data after index {index} to follow the deviation")]
    NotEnoughData { index: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 for configuration problems, 2 for
    /// numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } | Error::GridMismatch(_) => 1,
            Error::Blowup { .. } | Error::NotEnoughData { .. } | Error::Io { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
