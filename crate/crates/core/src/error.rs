use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {requested} complex entries requested, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a positive power of two")]
    NotPowerOfTwo(usize),

    #[error("qubit index {qubit} out of range for {count} qubits")]
    QubitOutOfRange { qubit: usize, count: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("{}", match .line { Some(l) => format!("line {l}: {msg}"), None => msg.clone() })]
    Parse { line: Option<usize>, msg: String },

    #[error("shot budget {requested} exceeds cap {cap}")]
    BudgetExceeded { requested: u64, cap: u64 },

    #[error("rounding did not reach a CPTP map within {iterations} iterations (tp {tp_residual:.3e}, min eig {min_eigenvalue:.3e})")]
    RoundingFailed {
        iterations: usize,
        tp_residual: f64,
        min_eigenvalue: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
