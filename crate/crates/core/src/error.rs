use thiserror::Error;

/// Errors shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("invariant breach [{name}]: {detail}")]
    Invariant { name: String, detail: String },
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn invariant(name: &str, detail: impl Into<String>) -> Error {
    Error::Invariant { name: name.to_string(), detail: detail.into() }
}
