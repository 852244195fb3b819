use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QheError {
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("oracle cap exceeded: {n} qubits requested, dense backend allows at most {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("operation not allowed by scheme: {0}")]
    NotAllowed(String),

    #[error("non-Clifford element: {0}")]
    NonClifford(String),

    #[error("requested outcome has zero probability")]
    ZeroProbability,

    #[error("resource exhausted: {0}")]
    Exhausted(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("uncorrectable syndrome {0:?}")]
    Uncorrectable(Vec<bool>),

    #[error("key space not enumerable: {0}")]
    NotEnumerable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-compact decryption: {0}")]
    NonCompact(String),

    #[error("nonconvergent regime: p0 = {p0} is not below threshold {p_threshold}")]
    Nonconvergent { p0: f64, p_threshold: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("insufficient samples: {got} < {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("not symplectic (residual {0:e})")]
    NotSymplectic(f64),
}

pub type Result<T> = std::result::Result<T, QheError>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(QheError::LengthMismatch { expected, got })
    }
}
