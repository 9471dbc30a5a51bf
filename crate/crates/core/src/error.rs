use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target {target} lies outside the interpolated range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
