use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Radar(#[from] ofdm_radar::Error),

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error("csv format error: {0}")]
    Csv(String),

    #[error("config file error: {0}")]
    ConfigFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
