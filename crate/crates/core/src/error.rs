use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("{a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },

    #[error("dense state needs {required} amplitudes but the cap is {cap}")]
    MemoryCap { required: u64, cap: u64 },

    #[error("qubit {index} is out of range for a register of {width} qubits")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("value {value} is out of range 0..{bound}")]
    ValueOutOfRange { value: u64, bound: u64 },

    #[error("states have different register layouts")]
    LayoutMismatch,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("wave number {0} is not on the 2π/L grid")]
    OffGridWaveNumber(f64),

    #[error("noise frequency grid is empty")]
    EmptyFrequencyGrid,

    #[error("noise component {0} is not active")]
    InactiveComponent(char),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no noise report for step {0}")]
    MissingStep(usize),

    #[error("invalid noise configuration: {0}")]
    InvalidNoiseConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
