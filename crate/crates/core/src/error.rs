use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unsupported qubit count {0}")]
    UnsupportedQubits(usize),

    #[error("parameter {name} = {value} outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("no single state for the BB84 average; use bb84_average_fidelity")]
    AverageOnly,

    #[error("no closed form in Table 1 for {0}")]
    NoClosedForm(String),

    #[error("grid must be ≥ 2")]
    GridTooSmall,

    #[error("invalid sweep range: start {start} must be below end {end}")]
    InvalidRange { start: f64, end: f64 },

    #[error("no crossover in interval [{lo}, {hi}]")]
    NoCrossover { lo: f64, hi: f64 },

    #[error("fidelity has imaginary part {0:e}; reference state or density matrix is inconsistent")]
    ImaginaryFidelity(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
