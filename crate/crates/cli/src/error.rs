use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] lacunary_core::Error),
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for bad input or a refused precondition, 2 for a numerical anomaly.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_anomaly() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
