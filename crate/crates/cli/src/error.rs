use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] shor_afs::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for the dense memory cap, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use shor_afs::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::MemoryCap { .. }) => 3,
            CliError::Core(
                E::InvalidLayout(_)
                | E::NotCoprime { .. }
                | E::InvalidNoiseConfig(_)
                | E::OffGridWaveNumber(_)
                | E::EmptyFrequencyGrid
                | E::Unsupported(_)
                | E::ValueOutOfRange { .. }
                | E::MissingStep(_),
            ) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
