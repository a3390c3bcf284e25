use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("strategy {strategy} is outside the ground set of size {size}")]
    StrategyOutOfRange { strategy: usize, size: usize },

    #[error("{what} requires {required} evaluations, guard is {limit}")]
    GuardExceeded {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("invalid membership vector: {0}")]
    InvalidVector(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("communication graph is not connected")]
    Disconnected,

    #[error("curvature is undefined: every singleton gain is zero")]
    DegenerateCurvature,

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 guard, 3 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GuardExceeded { .. } => 2,
            Error::Protocol(_) | Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
