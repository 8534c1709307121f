use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} exceeds the supported maximum of 6")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("body is not full-dimensional")]
    DegenerateBody,
    #[error("halfspace system is unbounded")]
    UnboundedInput,
    #[error("halfspace system has empty interior")]
    InfeasibleLP,
    #[error("negative scale coefficient {0}")]
    NegativeScale(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ill-conditioned Steiner fit: {0}")]
    IllConditionedFit(String),
    #[error("no sign change of the volume gap on the bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("surface measure does not span the ambient space")]
    NonSpanningMeasure,
    #[error("solver hit the iteration cap with residual {residual:.3e}")]
    MaxIterations { residual: f64 },
    #[error("frames overlap or fail to span the ambient space")]
    FrameOverlap,
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
}
