use crate::game::AgentId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("agent {0} is out of range for a game with {1} agents")]
    AgentOutOfRange(usize, usize),

    #[error("weight of ({0}, {0}) is undefined")]
    SelfPair(usize),

    #[error("invalid matching: coalition of size {0}")]
    InvalidMatching(usize),

    #[error("weight ({0}, {1}) has not been revealed yet")]
    HiddenWeight(AgentId, AgentId),

    #[error("{what} supports at most {max} agents, got {n}; use the bound-based checks instead")]
    Capacity {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("step {step}: algorithm {algorithm} returned illegal move {detail}")]
    IllegalMove {
        step: usize,
        algorithm: String,
        detail: String,
    },

    #[error("algorithm {algorithm}: {reason}")]
    Algorithm { algorithm: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("generator failed: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for errors that map to CLI exit code 2 (usage or capacity).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Capacity { .. } | Error::Parse(_) | Error::Precondition(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
