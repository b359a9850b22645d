use afrelay::RelayError;
use thiserror::Error;

/// Failures that end a command, each with a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check or comparison ran and did not pass.
    #[error("{0}")]
    Failed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    InvalidDims(String),

    #[error("{0}")]
    InsufficientData(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Relay(RelayError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::Io(_) | CliError::Relay(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::InvalidDims(_) => 3,
            CliError::InsufficientData(_) => 4,
        }
    }
}

impl From<RelayError> for CliError {
    fn from(e: RelayError) -> Self {
        match e {
            RelayError::InvalidDims(_) => CliError::InvalidDims(e.to_string()),
            RelayError::InsufficientData { .. } => CliError::InsufficientData(e.to_string()),
            RelayError::InvalidConfig(_) => CliError::Config(e.to_string()),
            other => CliError::Relay(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
