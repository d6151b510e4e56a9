use thiserror::Error;

/// Everything a command can fail with, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("divergent result: {0}")]
    Divergent(String),

    #[error("{0} claim(s) failed")]
    ClaimsFailed(usize),

    #[error(transparent)]
    Compute(#[from] grandamalgam::Error),

    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergent(_) => 3,
            CliError::ClaimsFailed(_) | CliError::Compute(_) | CliError::Other(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
