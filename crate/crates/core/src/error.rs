use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector")]
    ZeroVector,

    #[error("complex input: use split_complex for the modulus/phase path")]
    UseComplexSplit,

    #[error("precision L = {0} is too low (need L >= 2)")]
    PrecisionTooLow(usize),

    #[error("precision L = {0} is too high (at most {max})", max = crate::preprocess::MAX_PRECISION)]
    PrecisionTooHigh(usize),

    #[error("qubit index {index} out of range for {qubits} qubits")]
    BadIndex { index: usize, qubits: usize },

    #[error("gate has overlapping control/target qubit {0}")]
    OverlappingQubits(usize),

    #[error("measurement outcome has zero probability")]
    ImpossibleOutcome,

    #[error("shape mismatch: {0}")]
    BadShape(String),

    #[error("{qubits} qubits exceed the dense simulation cap of {cap}; use the branch simulator")]
    TooLarge { qubits: usize, cap: usize },

    #[error("parallelism M = {m} must lie in 1..={n}")]
    BadParallelism { m: usize, n: usize },

    #[error("ancilla qubit {qubit} not restored to |0> in branch {branch}")]
    UncomputeLeak { branch: usize, qubit: usize },

    #[error("gate {0} cannot be simulated on computational-basis branches")]
    NotBranchable(String),

    #[error("density {0} outside (0, 1]")]
    BadDensity(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    BadState(f64),

    #[error("grid of {n_s} sectors per side invalid for a {width}x{height} image")]
    BadGrid {
        n_s: usize,
        width: usize,
        height: usize,
    },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by a broken
    /// internal invariant.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::UncomputeLeak { .. } | Error::NotBranchable(_))
    }
}
