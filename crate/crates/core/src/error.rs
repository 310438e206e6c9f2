use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} coincides with a pole of the Blaschke product")]
    PoleHit(Complex64),

    #[error("zero {0} of the divisor is not matched in the dividend")]
    NotDivisible(Complex64),

    #[error("the model space of a constant inner function is {{0}}")]
    DegreeZero,

    #[error("grid sizes differ: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("operator spaces do not match: {0}")]
    TagMismatch(String),

    #[error("Hankel truncations did not stabilize (last two norms {prev:e}, {last:e})")]
    NoConvergence { prev: f64, last: f64 },

    #[error("operator does not intertwine the compressed shifts (residual {0:e})")]
    NotAnIntertwiner(f64),

    #[error("Laurent window too small: {0}")]
    WindowTooSmall(String),

    #[error("case does not match the values at the origin: {0}")]
    CaseMismatch(String),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
