use std::path::Path;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Text-format load failure; `line` is 1-based.
    #[error("load error in {path}, line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    /// Binary-format load failure; `offset` is the byte offset.
    #[error("load error in {path} at byte {offset}: {msg}")]
    Binary { path: String, offset: u64, msg: String },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("layout is missing vertex ids {0:?}")]
    MissingIds(Vec<u32>),

    /// A caller violated an operation contract (e.g. non-injective
    /// assignment, empty front).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
    }

    pub fn binary(path: &Path, offset: u64, msg: impl Into<String>) -> Self {
        Error::Binary { path: path.display().to_string(), offset, msg: msg.into() }
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
