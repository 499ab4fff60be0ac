use thiserror::Error;

/// Errors raised by composition, simulation and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("arity mismatch at box {box_index}: box has {expected} ports, filler exposes {actual}")]
    ArityMismatch {
        box_index: usize,
        expected: usize,
        actual: usize,
    },

    #[error("expected {expected} fillers, got {actual}")]
    FillerCount { expected: usize, actual: usize },

    #[error("label mismatch at junction {junction}: {detail}")]
    LabelMismatch { junction: usize, detail: String },

    #[error("invalid step size {0}: must be positive and finite")]
    InvalidStepSize(f64),

    #[error("non-finite state encountered at step {step}")]
    NonFinite { step: usize },

    #[error("inner solve failed on edge {edge}: {reason}")]
    InnerSolve { edge: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
