use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration.
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: qrc_core::Error },

    #[error(transparent)]
    Core(#[from] qrc_core::Error),
}

impl CliError {
    /// 2 for usage and validation problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use qrc_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::File { source, .. } => {
                if source.kind() == std::io::ErrorKind::NotFound {
                    2
                } else {
                    1
                }
            }
            CliError::Input { source, .. } | CliError::Core(source) => match source {
                E::Config(_) | E::Parse { .. } | E::DegenerateRange { .. } | E::InvalidGrid { .. } => 2,
                _ => 1,
            },
        }
    }
}
