use thiserror::Error;

/// Errors raised by density construction, functionals and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("density has no pieces")]
    Empty,

    #[error("infinite mass: the final unbounded piece has slope 0")]
    InfiniteMass,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("grid covers too little mass; half-width of at least {required} is needed")]
    InsufficientCoverage { required: f64 },

    #[error("grids have different steps ({0} vs {1})")]
    StepMismatch(f64, f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("generalized Gaussian needs q > 1/(1+p); got p = {p}, q = {q}")]
    ParameterCondition { p: f64, q: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
