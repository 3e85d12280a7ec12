use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state contains a non-finite component")]
    InvalidState,

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("input signal has zero power; SNR is undefined")]
    DegenerateSignal,

    #[error("{test}: sequence of {actual} bits is shorter than the required {required}")]
    SequenceTooShort {
        test: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by bad caller input rather than internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Divergence { .. } | Error::Io(_))
    }
}
