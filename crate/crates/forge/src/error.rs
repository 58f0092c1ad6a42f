use std::io;
use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] forge_core::Error),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
}

impl CliError {
    pub const CONFIG_EXIT: u8 = 2;
    pub const RUNTIME_EXIT: u8 = 3;

    /// 2 for anything the user supplied wrong, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        use forge_core::Error as E;
        match self {
            CliError::Core(E::Config(_) | E::Parameter(_) | E::Syntax { .. } | E::Type { .. }) => Self::CONFIG_EXIT,
            CliError::Read { .. } | CliError::Format { .. } | CliError::Config(_) => Self::CONFIG_EXIT,
            CliError::Core(_) | CliError::Write { .. } => Self::RUNTIME_EXIT,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
        CliError::Format { path: path.into(), message: message.to_string() }
    }
}
