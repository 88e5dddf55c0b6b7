use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum SleError {
    /// A vector field was evaluated at (or numerically at) its singularity.
    #[error("coincident points: |z - w| = {distance:e} is below the evaluation floor")]
    CoincidentPoints { distance: f64 },

    #[error("point {0} is not valid here")]
    InvalidPoint(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The driving point came within the stop guard of force point `index`.
    #[error("driving point collided with force point {index} (|W - V| = {distance:e})")]
    Collision { index: usize, distance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("tracked point {index} is swallowed")]
    Swallowed { index: usize },

    #[error("non-positive base {value:e} in observable factor")]
    NonPositiveBase { value: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("reparameterization grid exhausted before s = {0}")]
    GridExhausted(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SleError> = std::result::Result<T, E>;
