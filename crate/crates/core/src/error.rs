use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate acts twice on qubit {0}")]
    DuplicateQubit(usize),

    #[error("registers overlap on qubit {0}")]
    OverlappingRegisters(usize),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("refusing to allocate {requested} qubits (cap is {cap})")]
    ResourceCap { requested: usize, cap: usize },

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("energy window violated: {0:.3e} probability in the top bin")]
    WindowViolation(f64),

    #[error("no dominant peak (cluster probability {0:.3})")]
    NoDominantPeak(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
