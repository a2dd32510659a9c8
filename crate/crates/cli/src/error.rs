use std::io;

/// Errors surfaced by the runner, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: malformed config, flag or argument. Exit 2.
    #[error("{0}")]
    Validation(String),
    /// Numeric or construction failure, or I/O. Exit 3.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        CliError::Failure(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Failure(_) => 3,
        }
    }
}

impl From<ultralab_core::Error> for CliError {
    fn from(e: ultralab_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(format!("json: {e}"))
    }
}
