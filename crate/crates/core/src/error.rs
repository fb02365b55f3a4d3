use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid resolution: {0}")]
    InvalidResolution(String),

    #[error("basis Gram matrix deviates from identity by {deviation:.3e}")]
    GramCheckFailed { deviation: f64 },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },

    #[error("fields live on different discretizations")]
    GridMismatch,

    #[error("linear operator is singular at mode (k={0}, m={1})")]
    SingularMode(usize, isize),

    #[error("cannot project the zero field onto the Nehari manifold")]
    ZeroField,

    #[error("iteration collapsed to the zero field")]
    CollapsedToZero,

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigsNotConverged { iterations: usize, residual: f64 },

    #[error("linearized operator is numerically singular on the symmetric sector")]
    NearSingular,

    #[error("shooting bisection stalled: {0}")]
    BisectionStalled(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("field tail not resolved: {fraction:.3e} of the mass lies outside the target box")]
    TailNotResolved { fraction: f64 },

    #[error("need at least {needed} tail samples, have {have}")]
    InsufficientTail { needed: usize, have: usize },

    #[error("prescribed mass c^2 = {target:.6} exceeds the range reached on the tails ({reached:.6})")]
    MassTooLarge { target: f64, reached: f64 },

    #[error("could not bracket the prescribed mass: {0}")]
    BracketNotFound(String),

    #[error("time step too large: energy drift {drift:.3e} over the first steps")]
    StepTooLarge { drift: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
