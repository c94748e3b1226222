use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(&'static str),

    #[error("field shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("heat solution not positive: A = {amplitude} <= sum |eps| = {bound}")]
    Positivity { amplitude: f64, bound: f64 },

    #[error("level-set map not monotone at grid point {point}, tau = {tau} (slope {slope})")]
    NonMonotone { point: usize, tau: f64, slope: f64 },

    #[error("Newton failed at grid point {point} after {iterations} iterations (relative residual {residual:e})")]
    NewtonFailed {
        point: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("quadrature did not converge on [{lo}, {hi}] (panel disagreement {disagreement:e})")]
    Quadrature { lo: f64, hi: f64, disagreement: f64 },

    #[error("volume tail bound {tail:e} exceeds cap {cap:e}")]
    TailTooLarge { tail: f64, cap: f64 },

    #[error("ladder too short or not increasing: {0}")]
    Ladder(String),

    #[error("degenerate fit: deviations below {floor:e}, quantity already converged")]
    DegenerateFit { floor: f64 },
}
