use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model, scenario or configuration content.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The burn-in process drifted towards a degenerate network.
    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("tuning failed: {0}")]
    Tuning(String),

    /// The derivative matrix could not be inverted, usually collinear effects.
    #[error("singular derivative matrix: {0}")]
    SingularDerivative(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("test refused: {0}")]
    TestRefused(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
