use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid law {name}: {reason}")]
    InvalidLaw { name: String, reason: String },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} would exceed budget of {budget}")]
    ResourceLimit { what: String, budget: usize },

    #[error("forest invariant violated at vertex {vertex}: {reason}")]
    InvariantViolation { vertex: usize, reason: String },

    #[error("requested {what} beyond horizon {horizon}")]
    BeyondHorizon { what: String, horizon: f64 },

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
