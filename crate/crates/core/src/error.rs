use thiserror::Error;

/// Errors raised by the consensus model and its analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("round {got} out of sequence: expected round {expected}")]
    Sequencing { expected: usize, got: usize },

    #[error("invariant violated: {0}")]
    Validation(String),

    #[error("round {requested} is beyond recorded history ({available} rounds)")]
    OutOfRange { requested: usize, available: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("stability requires lambda > Lambda (got lambda={lambda}, Lambda={big_lambda})")]
    Stability { lambda: f64, big_lambda: f64 },

    #[error("singular bound: {0}")]
    Singularity(String),

    #[error("estimate at level {level} has zero hits after {replicas} replicas; raise --replicas")]
    InsufficientReplicas { level: f64, replicas: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
