use std::path::PathBuf;

use thiserror::Error;

/// Command failures, each mapped to a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    StrictParse {
        path: PathBuf,
        source: capmkit::ParseError,
    },
    #[error("no usable overlap between the input series: {0}")]
    EmptyOverlap(String),
    #[error("{0}")]
    InvalidSimSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },
    #[error(transparent)]
    Panel(#[from] capmkit::PanelError),
    #[error(transparent)]
    Regression(#[from] capmkit::RegressionError),
    #[error(transparent)]
    Diagnostics(#[from] capmkit::DiagnosticsError),
    #[error(transparent)]
    Returns(#[from] capmkit::ReturnsError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingFile(_) => 2,
            CliError::StrictParse { .. } => 3,
            CliError::EmptyOverlap(_) => 4,
            CliError::InvalidSimSpec(_) => 5,
            _ => 1,
        }
    }
}

impl From<capmkit::SimulationError> for CliError {
    fn from(err: capmkit::SimulationError) -> Self {
        match err {
            capmkit::SimulationError::InvalidSpec(_)
            | capmkit::SimulationError::TooFewTrials { .. } => {
                CliError::InvalidSimSpec(err.to_string())
            }
            capmkit::SimulationError::Returns(e) => CliError::Returns(e),
            capmkit::SimulationError::Regression(e) => CliError::Regression(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
