use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} = {value} is outside its valid domain")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("cannot place {count} traffic vehicles with {min_gap} m separation on a {length:.3} m track")]
    TrafficInfeasible {
        count: usize,
        min_gap: f64,
        length: f64,
    },

    #[error("episode already terminated; call reset first")]
    EpisodeTerminated,

    #[error("rollout buffer holds {len} of {capacity} transitions")]
    BufferNotFull { len: usize, capacity: usize },

    #[error("malformed {kind}: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }
}
