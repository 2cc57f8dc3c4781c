use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input, invalid config or unwritable output.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    FitFailed(String),
    #[error("{0}")]
    MissingArtifacts(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::FitFailed(_) => 3,
            CliError::MissingArtifacts(_) => 4,
        }
    }
}

pub fn input(msg: impl std::fmt::Display) -> CliError {
    CliError::Input(msg.to_string())
}
