use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: io::Error },

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("unknown column {column:?}; available columns: {}", available.join(", "))]
    UnknownColumn { column: String, available: Vec<String> },

    #[error("{}: unsupported model format: expected version {expected}, found {found}", path.display())]
    Version { path: PathBuf, expected: String, found: String },

    #[error("{}: truncated model file", path.display())]
    Truncated { path: PathBuf },

    #[error("{}: {error}", path.display())]
    Csv { path: PathBuf, error: csv::Error },

    #[error(transparent)]
    Core(#[from] ftok_core::Error),
}

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|error| Error::Io { path: path.into(), error })
    }
}
