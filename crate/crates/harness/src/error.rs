use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] grasscount_core::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown suite {0:?} (expected one of duality, split, moebius, hecke, dirichlet, projection, scale, all)")]
    UnknownSuite(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownSuite(_)
                | Error::Json(_)
                | Error::Core(grasscount_core::Error::Argument(_) | grasscount_core::Error::Parse(_))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
