use thiserror::Error;

/// Errors raised by the simulator, optimizers and attack calculators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square or has inconsistent size: {0}")]
    Shape(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter length {got} does not match sequence length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("malformed circuit: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
