use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("duplicate gate target {0}")]
    DuplicateTarget(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel arity {arity} does not match {targets} targets")]
    ArityMismatch { arity: usize, targets: usize },

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expectation value has imaginary part {0:.3e}")]
    ComplexExpectation(f64),

    #[error("depolarizing strength f must be nonzero")]
    ZeroDepolarizingStrength,

    #[error("basis has {0} non-Z letters; at most 16 are supported")]
    BasisTooLarge(usize),

    #[error("all {0} Monte-Carlo samples were excluded by the amplitude guard")]
    AllSamplesExcluded(usize),

    #[error("non-finite gradient entry at parameter {0}")]
    NonFiniteGradient(usize),

    #[error("non-finite loss at iteration {0}")]
    NonFiniteLoss(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported file version {found} (expected {expected})")]
    UnsupportedVersion { expected: u32, found: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
