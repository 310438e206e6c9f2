pub mod blaschke;
pub mod circle;
pub mod dualspace;
pub mod error;
pub mod harness;
pub mod intertwine;
pub mod linalg;
pub mod matrix;
pub mod modelspace;
pub mod operators;

pub use blaschke::BlaschkeProduct;
pub use circle::CircleFunction;
pub use dualspace::{DualBlockOperator, LaurentWindow};
pub use error::{Error, Result};
pub use harness::{CheckConfig, Tolerances, VerificationReport};
pub use matrix::{OperatorMatrix, SpaceTag};
pub use modelspace::ModelBasis;
