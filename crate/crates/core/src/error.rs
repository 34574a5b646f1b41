use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: ladder operators need at least 2 basis states")]
    InvalidDimension(usize),

    #[error("matrix is not Hermitian: |H[{row},{col}] - conj(H[{col},{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("Pauli coefficient for {string} has imaginary part {imag:e}")]
    ComplexCoefficient { string: String, imag: f64 },

    #[error("invalid Pauli string {0:?}")]
    InvalidPauliString(String),

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("initial basis index {index} out of range for {n_qubits} qubits")]
    InvalidInitialState { index: usize, n_qubits: usize },

    #[error("parameter vector has length {found}, ansatz expects {expected}")]
    ParameterLength { expected: usize, found: usize },

    #[error("coefficient vector has length {found}, expected {expected}")]
    CoefficientLength { expected: usize, found: usize },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("at least 2 repetitions are required, got {0}")]
    TooFewRepetitions(usize),

    #[error("objective returned non-finite value {value} at iteration {iteration}")]
    NonFiniteObjective { iteration: usize, value: f64 },

    #[error("invalid SPSA configuration: {0}")]
    InvalidSpsa(String),

    #[error("model {0} is not a two-mode family; the constraint command needs closed-free, closed-phi4 or open-phi4")]
    NotTwoMode(crate::oscillator::Family),

    #[error("shot grid needs at least 4 strictly increasing points")]
    InsufficientGrid,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    /// True for errors caused by user configuration rather than a failed run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::NotTwoMode(_) | Error::InsufficientGrid | Error::InvalidSpsa(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
