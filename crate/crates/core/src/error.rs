use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix does not have full row rank (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("not primitive: {0}")]
    NotPrimitive(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
