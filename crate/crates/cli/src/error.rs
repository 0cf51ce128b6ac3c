use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// A malformed input file. `row` is the 1-based data row, not counting the header.
    #[error("{}{}: {message}", path.display(), row.map(|r| format!(", row {r}")).unwrap_or_default())]
    Input {
        path: PathBuf,
        row: Option<usize>,
        message: String,
    },

    #[error("{}: has {found} rows but the data has {expected}", path.display())]
    Dimension {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bma_cluster::Error),
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, row: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            row,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Dimension { .. } => 3,
            CliError::Core(bma_cluster::Error::Model { source, .. })
                if matches!(**source, bma_cluster::Error::DimensionMismatch { .. }) =>
            {
                3
            }
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}
