use std::path::PathBuf;

use athtrack::{ConfigError, D3Error, EvalError, GeometryError, MotError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values or combinations the parser could not rule out.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: MotError },
    #[error("{path}: {source}")]
    Geometry { path: PathBuf, source: GeometryError },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("decontamination failed: {0}")]
    Decontaminate(D3Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Configuration problems (bad LB, bad step size) are usage errors; anything
/// else coming out of the descent is a runtime failure.
impl From<D3Error> for CliError {
    fn from(e: D3Error) -> Self {
        match e {
            D3Error::LowerBound(_) | D3Error::StepSize(_) | D3Error::LiteralMode => CliError::Usage(e.to_string()),
            D3Error::NoBoxes => CliError::Decontaminate(e),
        }
    }
}
