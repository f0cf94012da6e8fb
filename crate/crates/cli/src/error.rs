use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Failure while running; exit code 3.
    #[error("run aborted: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<kanppo_core::Error> for CliError {
    fn from(e: kanppo_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
