use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] omniplay::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {source}")]
    Jsonl {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0} already holds results; pass --force to overwrite")]
    OutputExists(PathBuf),
    #[error("no episode logs found in {0}")]
    NoLogs(String),
    #[error("seed manifest for {game} holds {available} seeds but {requested} were requested")]
    ManifestTooShort {
        game: String,
        available: usize,
        requested: usize,
    },
    #[error("partial tournament log does not match this configuration: {0}")]
    ResumeMismatch(String),
    #[error(transparent)]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
