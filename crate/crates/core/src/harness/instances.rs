//! Random inputs for the suites: pairs of inner functions with a prescribed
//! common factor, and Laurent-polynomial symbols.

use num_complex::Complex64;
use rand::Rng;

use crate::blaschke::{BlaschkeProduct, RandomZeros};
use crate::circle::CircleFunction;

/// Zeros of model-space suites stay inside this radius.
pub const MODEL_RADIUS: f64 = 0.8;

/// Dual-space suites keep zeros in this annulus so that symbol tails (and
/// therefore window guards) stay short and `|θ(0)|` stays away from zero.
pub const DUAL_RADII: (f64, f64) = (0.25, 0.7);

const SEPARATION: f64 = 0.05;

pub fn rand_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Laurent polynomial with random coefficients on `lo..=hi`, kept as terms
/// so it can be sampled on any grid.
#[derive(Clone, Debug)]
pub struct Laurent(pub Vec<(i64, Complex64)>);

impl Laurent {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> Self {
        Laurent((lo..=hi).map(|m| (m, rand_c(rng))).collect())
    }

    pub fn sample(&self, n: usize) -> CircleFunction {
        CircleFunction::from_laurent(n, &self.0)
    }

    pub fn terms(&self) -> Vec<[f64; 3]> {
        self.0.iter().map(|(m, c)| [*m as f64, c.re, c.im]).collect()
    }
}

/// How the two inner functions of a pair share zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sharing {
    /// Common factor of random degree (possibly none).
    Random,
    /// At least one common zero.
    Shared,
    Coprime,
    /// α divides θ.
    AlphaDividesTheta,
    /// θ divides α.
    ThetaDividesAlpha,
}

pub fn product<R: Rng + ?Sized>(rng: &mut R, zeros: &[Complex64]) -> BlaschkeProduct {
    BlaschkeProduct::new(zeros.iter().map(|&a| (a, 1)).collect(), rand_phase(rng)).expect("zeros inside the disk")
}

pub fn degree<R: Rng + ?Sized>(rng: &mut R, range: (usize, usize)) -> usize {
    rng.random_range(range.0..=range.1)
}

/// `(θ, α)` with degrees in `range` and the requested common factor.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, range: (usize, usize), radius: (f64, f64), sharing: Sharing) -> (BlaschkeProduct, BlaschkeProduct) {
    let opts = RandomZeros::within(radius.1).annulus(radius.0).separated(SEPARATION);
    let mut dt = degree(rng, range);
    let mut da = degree(rng, range);
    let g = match sharing {
        Sharing::Random => rng.random_range(0..=dt.min(da)),
        Sharing::Shared => rng.random_range(1..=dt.min(da)),
        Sharing::Coprime => 0,
        Sharing::AlphaDividesTheta => {
            if da > dt {
                std::mem::swap(&mut da, &mut dt);
            }
            da
        }
        Sharing::ThetaDividesAlpha => {
            if dt > da {
                std::mem::swap(&mut da, &mut dt);
            }
            dt
        }
    };
    let common = opts.sample(rng, g, &[]);
    let rest_t = opts.sample(rng, dt - g, &common);
    let avoid: Vec<Complex64> = common.iter().chain(&rest_t).copied().collect();
    let rest_a = opts.sample(rng, da - g, &avoid);
    let zt: Vec<Complex64> = common.iter().chain(&rest_t).copied().collect();
    let za: Vec<Complex64> = common.iter().chain(&rest_a).copied().collect();
    (product(rng, &zt), product(rng, &za))
}

pub fn describe_pair(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> serde_json::Value {
    serde_json::json!({ "theta": theta, "alpha": alpha })
}
