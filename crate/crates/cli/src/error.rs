use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] heislim_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("acceptance failed for criteria {0:?}")]
    Acceptance(Vec<u8>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Acceptance(_) => 2,
            CliError::Clap(e) if !e.use_stderr() => 0,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
