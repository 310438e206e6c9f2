//! Deterministic inputs shared by the benchmarks.

use mskit_core::circle::DEFAULT_GRID;
use mskit_core::operators::model_bases;
use mskit_core::{BlaschkeProduct, CircleFunction, ModelBasis};
use num_complex::Complex64;

/// `(θ, α)` of the given degree sharing `degree / 2` zeros.
pub fn pair(degree: usize, seed: u64) -> (BlaschkeProduct, BlaschkeProduct) {
    let shared = degree / 2;
    let common = BlaschkeProduct::random(shared, seed, 0.8);
    let theta = common.multiply(&BlaschkeProduct::random(degree - shared, seed + 1, 0.8));
    let alpha = common.multiply(&BlaschkeProduct::random(degree - shared, seed + 2, 0.8));
    (theta, alpha)
}

/// Same as [`pair`] with zeros kept away from the boundary, for the dual
/// space where symbol tails set the window size.
pub fn dual_pair(degree: usize, seed: u64) -> (BlaschkeProduct, BlaschkeProduct) {
    let theta = BlaschkeProduct::random(degree, seed, 0.6);
    let alpha = BlaschkeProduct::random(degree, seed + 1, 0.6);
    (theta, alpha)
}

pub fn bases(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> (ModelBasis, ModelBasis) {
    let mut b = model_bases(&[theta, alpha], DEFAULT_GRID).expect("zeros inside the disk");
    let ab = b.pop().expect("two bases");
    let tb = b.pop().expect("two bases");
    (tb, ab)
}

/// `z̄³ + … + z³` with fixed coefficients.
pub fn symbol(n: usize) -> CircleFunction {
    let terms: Vec<(i64, Complex64)> = (-3i64..=3).map(|m| (m, Complex64::new(1.0 / (1 + m.abs()) as f64, 0.3 * m as f64))).collect();
    CircleFunction::from_laurent(n, &terms)
}
