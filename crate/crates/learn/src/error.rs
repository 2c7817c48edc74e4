use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("single class: {0}")]
    SingleClass(String),
    #[error("no later window")]
    NoLaterWindow,
    #[error("importance requires trees")]
    ImportanceRequiresTrees,
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
