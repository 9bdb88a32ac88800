use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Where in an input file a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub path: PathBuf,
    pub line: Option<u64>,
}

impl Location {
    pub fn file(path: &Path) -> Self {
        Location { path: path.to_path_buf(), line: None }
    }

    pub fn line(path: &Path, line: u64) -> Self {
        Location { path: path.to_path_buf(), line: Some(line) }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}", self.path.display()),
            None => write!(f, "{}", self.path.display()),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Bad or missing configuration, flags, or paths.
    #[error("config error: {0}")]
    Config(String),
    /// Malformed or inconsistent input data.
    #[error("{at}: {message}")]
    Data { at: Location, message: String },
    /// A failure in an analysis step, not tied to one file.
    #[error("{0}")]
    Analysis(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output directory {0} is locked by another run (remove .xfer.lock if stale)")]
    Locked(PathBuf),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }

    pub fn data(at: Location, message: impl fmt::Display) -> Self {
        Error::Data { at, message: message.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<xfer_core::analysis::AnalysisError> for Error {
    fn from(e: xfer_core::analysis::AnalysisError) -> Self {
        Error::Analysis(e.to_string())
    }
}

impl From<xfer_core::learn::LearnError> for Error {
    fn from(e: xfer_core::learn::LearnError) -> Self {
        Error::Analysis(e.to_string())
    }
}

impl From<xfer_core::encoding::EncodingError> for Error {
    fn from(e: xfer_core::encoding::EncodingError) -> Self {
        Error::Analysis(e.to_string())
    }
}

impl From<xfer_core::distance::DistanceError> for Error {
    fn from(e: xfer_core::distance::DistanceError) -> Self {
        Error::Analysis(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
