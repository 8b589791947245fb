use thiserror::Error;

/// Errors produced by the simulation and detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("scene sampler exhausted after {attempts} attempts")]
    SamplerExhausted { attempts: usize },

    #[error("detector degenerate: {0}")]
    DetectorDegenerate(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
