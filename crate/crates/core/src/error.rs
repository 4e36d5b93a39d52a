use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("separation violated: min(f - b) = {min:e} < {required:e}")]
    SeparationViolation { min: f64, required: f64 },

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("input is constant; the ratio is undefined")]
    ConstantInput,

    #[error("convexity violated: second derivative {value:e} at z = {z:e}")]
    NonConvex { z: f64, value: f64 },

    #[error("input must have zero mean (mean = {mean:e})")]
    NonZeroMean { mean: f64 },

    #[error("query z = {z:e} outside tabulated range [{lo:e}, {hi:e}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },

    #[error(
        "stability violated at step {step} (t = {t}): sup norm {after:e} exceeds {before:e} + {tol:e}"
    )]
    StabilityViolation {
        step: usize,
        t: f64,
        before: f64,
        after: f64,
        tol: f64,
    },

    #[error("decay fit needs positive values: {0}")]
    NonPositiveValues(String),

    #[error("too few samples for a decay fit: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("csv: {0}")]
    Csv(String),
}
