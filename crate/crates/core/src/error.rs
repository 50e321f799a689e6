use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} sites vs {right} sites")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid pauli string {0:?}")]
    ParsePauli(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported hamiltonian term {op} (coefficient {coeff}): {reason}")]
    UnsupportedTerm { op: String, coeff: f64, reason: String },

    #[error("target observable {target} is not supported for this model: {reason}")]
    UnsupportedTarget { target: String, reason: String },

    #[error("cannot remove term {op}: not present in the hamiltonian")]
    MissingTerm { op: String },

    #[error("site index {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("per-gate error probability {0} exceeds 1")]
    ErrorProbabilityTooLarge(f64),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("density matrix invariant violated: {0}")]
    InvariantViolation(String),

    #[error("folding factor {factor} is not resolvable on a circuit with {two_qubit} two-qubit gates")]
    FoldResolution { factor: f64, two_qubit: usize },

    #[error("invalid folding factor {0}: must be >= 1")]
    InvalidFoldFactor(f64),

    #[error("duplicate gain {0} in richardson extrapolation")]
    DuplicateGain(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("logarithm undefined: {0}")]
    LogDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
