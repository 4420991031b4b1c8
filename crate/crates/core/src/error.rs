use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitCountMismatch(usize, usize),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid qubit pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("{what}: {n_qubits} qubits exceeds the limit of {limit}")]
    TooManyQubits {
        what: &'static str,
        n_qubits: usize,
        limit: usize,
    },

    #[error("mirror circuits require an even, positive qubit count (got {0})")]
    OddQubitCount(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot twirl over an empty group")]
    EmptyGroup,

    #[error("channel {0} is not a stochastic Pauli channel")]
    NonPauliChannel(String),

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
