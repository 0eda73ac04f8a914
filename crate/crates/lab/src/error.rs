use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] blp_lab_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration errors, 3 for guard
    /// violations, 4 for I/O errors.
    pub fn exit_code(&self) -> u8 {
        use blp_lab_core::Error as E;
        match self {
            LabError::Config(_) | LabError::Core(E::InvalidConfig(_)) => 2,
            LabError::Core(_) => 3,
            LabError::Io { .. } => 4,
        }
    }
}
