use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: expected length {expected}, got {actual}")]
    Length {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("step called on an episode that has already ended; call reset first")]
    EpisodeEnded,

    #[error("bridge: {0}")]
    Bridge(#[from] BridgeError),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Failures of the line-delimited JSON environment bridge.
#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("failed to spawn `{command}`: {source}")]
    Spawn { command: String, source: io::Error },

    #[error("protocol violation ({reason}) in line: {line}")]
    Protocol { line: String, reason: String },

    #[error("child process exited (status: {status})")]
    ChildExited { status: String },

    #[error("no reply within {millis} ms")]
    Timeout { millis: u64 },
}

impl Error {
    pub(crate) fn length(op: &'static str, expected: usize, actual: usize) -> Self {
        Error::Length {
            op,
            expected,
            actual,
        }
    }
}
