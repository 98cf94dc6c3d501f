use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("SINR undefined: {0}")]
    UndefinedSinr(String),
    #[error("precoder undefined: {0}")]
    UndefinedPrecoder(String),
    #[error("placement exhausted: {0}")]
    PlacementExhausted(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<S: Into<String>>(msg: S) -> Error {
    Error::InvalidArgument(msg.into())
}
