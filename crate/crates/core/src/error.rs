use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("resource limit exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: u64 },
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }

    pub fn resource(what: impl Into<String>, limit: u64) -> Self {
        Error::Resource { what: what.into(), limit }
    }
}
