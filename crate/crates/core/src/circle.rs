//! Functions on the unit circle, stored as samples at the roots of unity.
//!
//! A [`CircleFunction`] with `n` samples holds `f(ω^k)` for `ω = e^{2πi/n}`.
//! Its Laurent coefficients are obtained by one FFT and cached. Coefficient
//! `m` is stored at slot `m mod n`, so nonnegative frequencies occupy
//! `[0, n/2)` and negative frequencies `[n/2, n)`; every projection in this
//! module uses that split.
//!
//! Arithmetic operators panic when the grids differ, like shape mismatches
//! in dense array libraries. Public entry points that combine user-supplied
//! functions check the grids first and return [`Error::GridMismatch`].

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(data.len())
        } else {
            planner.plan_fft_forward(data.len())
        };
        fft.process(data);
    });
}

/// Slot of Laurent index `m` in an FFT-ordered array of length `n`.
#[inline]
pub fn slot(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Laurent index stored at FFT slot `k`.
#[inline]
pub fn frequency(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// The `n` quadrature nodes `e^{2πik/n}`.
pub fn grid_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Smallest power-of-two grid, at least `requested`, for which the Fourier
/// tail of a rational function with poles at `1/ρ` is below 1e-13.
pub fn adequate_grid(rho: f64, requested: usize) -> usize {
    let mut n = requested.max(8).next_power_of_two();
    if rho <= 0.0 {
        return n;
    }
    while rho.powf(n as f64 / 4.0) / (1.0 - rho) >= 1e-13 && n < (1 << 22) {
        n *= 2;
    }
    n
}

pub const DEFAULT_GRID: usize = 4096;

/// Common grid adequate for every product in `products`.
pub fn common_grid(products: &[&BlaschkeProduct], requested: usize) -> usize {
    let rho = products
        .iter()
        .map(|b| b.max_modulus())
        .fold(0.0, f64::max);
    adequate_grid(rho, requested)
}

#[derive(Clone, Debug)]
pub struct CircleFunction {
    samples: Vec<Complex64>,
    /// `Some((lo, hi))` when the function is known to be a Laurent
    /// polynomial supported in `[lo, hi]`.
    band: Option<(i64, i64)>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl CircleFunction {
    pub fn from_samples(samples: Vec<Complex64>) -> Self {
        assert!(!samples.is_empty(), "empty sample vector");
        Self {
            samples,
            band: None,
            coeffs: OnceLock::new(),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_samples(grid_points(n).into_iter().map(f).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, Complex64::new(0.0, 0.0))
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        let mut f = Self::from_samples(vec![c; n]);
        f.band = Some((0, 0));
        f
    }

    /// `z^k` for any integer `k`.
    pub fn monomial(n: usize, k: i64) -> Self {
        let mut f = Self::from_samples(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * ((k * j as i64).rem_euclid(n as i64)) as f64 / n as f64;
                    Complex64::from_polar(1.0, t)
                })
                .collect(),
        );
        f.band = Some((k, k));
        f
    }

    /// Laurent polynomial `Σ c_k z^k` from `(k, c_k)` terms.
    pub fn from_laurent(n: usize, terms: &[(i64, Complex64)]) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for &(k, c) in terms {
            coeffs[slot(k, n)] += c;
        }
        let mut f = Self::from_coefficients(coeffs);
        if let (Some(lo), Some(hi)) = (
            terms.iter().map(|t| t.0).min(),
            terms.iter().map(|t| t.0).max(),
        ) {
            f.band = Some((lo, hi));
        }
        f
    }

    /// Inverse of [`CircleFunction::coefficients`]: builds samples from an
    /// FFT-ordered coefficient array.
    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Self {
        let mut samples = coeffs.clone();
        fft_in_place(&mut samples, true);
        let f = Self::from_samples(samples);
        let _ = f.coeffs.set(coeffs);
        f
    }

    pub fn from_blaschke(n: usize, b: &BlaschkeProduct) -> Self {
        Self::from_fn(n, |z| b.eval_unchecked(z))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn band(&self) -> Option<(i64, i64)> {
        self.band
    }

    pub fn same_grid(&self, other: &CircleFunction) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    /// FFT-ordered Laurent coefficients (see module docs).
    pub fn coefficients(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let n = self.samples.len();
            let mut c = self.samples.clone();
            fft_in_place(&mut c, false);
            let scale = 1.0 / n as f64;
            c.iter_mut().for_each(|v| *v *= scale);
            c
        })
    }

    /// Laurent coefficient of `z^m`; zero outside the resolvable range
    /// `[-n/2, n/2)`.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.len() as i64;
        if m < -n / 2 || m >= n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients()[slot(m, n as usize)]
    }

    /// Coefficients for `m = lo..=hi`.
    pub fn laurent(&self, lo: i64, hi: i64) -> Vec<Complex64> {
        (lo..=hi).map(|m| self.coeff(m)).collect()
    }

    /// Smallest `(neg, pos)` such that every coefficient with index below
    /// `-neg` or above `pos` is under `tol` times the largest coefficient.
    pub fn effective_band(&self, tol: f64) -> (usize, usize) {
        let c = self.coefficients();
        let n = c.len();
        let peak = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return (0, 0);
        }
        let cut = tol * peak.max(1.0);
        let mut pos = 0;
        let mut neg = 0;
        for (k, v) in c.iter().enumerate() {
            if v.norm() > cut {
                let m = frequency(k, n);
                if m >= 0 {
                    pos = pos.max(m as usize);
                } else {
                    neg = neg.max((-m) as usize);
                }
            }
        }
        (neg, pos)
    }

    /// Value at the point `z` of the unit circle, or of the disk for
    /// analytic functions, by summing Laurent coefficients.
    pub fn eval_series(&self, z: Complex64) -> Complex64 {
        let c = self.coefficients();
        let n = c.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in c.iter().enumerate() {
            let m = frequency(k, n);
            acc += v * z.powi(m as i32);
        }
        acc
    }

    pub fn conj(&self) -> Self {
        let mut f = Self::from_samples(self.samples.iter().map(|v| v.conj()).collect());
        f.band = self.band.map(|(lo, hi)| (-hi, -lo));
        f
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut f = Self::from_samples(self.samples.iter().map(|v| v * c).collect());
        f.band = self.band;
        f
    }

    /// Pointwise quotient; the divisor must not vanish on the grid.
    pub fn div(&self, other: &CircleFunction) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        Self::from_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a / b)
                .collect(),
        )
    }

    /// `⟨f, g⟩ = ∫ f ḡ dm` by the trapezoidal rule.
    pub fn inner(&self, other: &CircleFunction) -> Complex64 {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        s / self.len() as f64
    }

    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.len() as f64).sqrt()
    }

    /// Maximum modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn filtered(&self, keep: impl Fn(i64) -> bool) -> Self {
        let n = self.len();
        let coeffs: Vec<Complex64> = self
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, v)| if keep(frequency(k, n)) { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self::from_coefficients(coeffs)
    }

    /// Riesz projection onto `H²` (frequencies `≥ 0`).
    pub fn p_plus(&self) -> Self {
        let mut f = self.filtered(|m| m >= 0);
        f.band = self.band.map(|(lo, hi)| (lo.max(0), hi.max(0)));
        f
    }

    /// Projection onto `H²_-` (frequencies `< 0`).
    pub fn p_minus(&self) -> Self {
        let mut f = self.filtered(|m| m < 0);
        f.band = self.band.map(|(lo, hi)| (lo.min(-1), hi.min(-1)));
        f
    }

    /// `P_{αH²} f = α P⁺(ᾱ f)`.
    pub fn p_inner_multiple(&self, alpha: &BlaschkeProduct) -> Self {
        let a = CircleFunction::from_blaschke(self.len(), alpha);
        &a * &(&a.conj() * self).p_plus()
    }

    /// `P_θ f = P⁺f − θ P⁺(θ̄ f)`, the model-space projection computed
    /// without a basis.
    pub fn p_model(&self, theta: &BlaschkeProduct) -> Self {
        &self.p_plus() - &self.p_inner_multiple(theta)
    }

    /// `J^# f(z) = conj(f(z̄))`.
    pub fn jsharp(&self) -> Self {
        let n = self.len();
        let mut f = Self::from_samples(
            (0..n)
                .map(|k| self.samples[(n - k) % n].conj())
                .collect(),
        );
        f.band = self.band;
        f
    }

    /// `C_θ f = θ z̄ f̄`.
    pub fn conjugation(&self, theta: &BlaschkeProduct) -> Self {
        let n = self.len();
        let t = CircleFunction::from_blaschke(n, theta);
        let zbar = CircleFunction::monomial(n, -1);
        &(&t * &zbar) * &self.conj()
    }

    pub fn max_abs_diff(&self, other: &CircleFunction) -> f64 {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn merge_band(a: Option<(i64, i64)>, b: Option<(i64, i64)>, f: impl Fn((i64, i64), (i64, i64)) -> (i64, i64)) -> Option<(i64, i64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(f(x, y)),
        _ => None,
    }
}

impl Add for &CircleFunction {
    type Output = CircleFunction;
    fn add(self, rhs: &CircleFunction) -> CircleFunction {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        let mut f = CircleFunction::from_samples(
            self.samples.iter().zip(&rhs.samples).map(|(a, b)| a + b).collect(),
        );
        f.band = merge_band(self.band, rhs.band, |x, y| (x.0.min(y.0), x.1.max(y.1)));
        f
    }
}

impl Sub for &CircleFunction {
    type Output = CircleFunction;
    fn sub(self, rhs: &CircleFunction) -> CircleFunction {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        let mut f = CircleFunction::from_samples(
            self.samples.iter().zip(&rhs.samples).map(|(a, b)| a - b).collect(),
        );
        f.band = merge_band(self.band, rhs.band, |x, y| (x.0.min(y.0), x.1.max(y.1)));
        f
    }
}

impl Mul for &CircleFunction {
    type Output = CircleFunction;
    fn mul(self, rhs: &CircleFunction) -> CircleFunction {
        assert_eq!(self.len(), rhs.len(), "grid mismatch");
        let mut f = CircleFunction::from_samples(
            self.samples.iter().zip(&rhs.samples).map(|(a, b)| a * b).collect(),
        );
        f.band = merge_band(self.band, rhs.band, |x, y| (x.0 + y.0, x.1 + y.1));
        f
    }
}

impl Neg for &CircleFunction {
    type Output = CircleFunction;
    fn neg(self) -> CircleFunction {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Output of [`projections_laurent`].
#[derive(Clone, Debug)]
pub struct LaurentProjections {
    pub plus: CircleFunction,
    pub minus: CircleFunction,
    pub inner_multiple: Option<CircleFunction>,
}

/// `P⁺f`, `P⁻f` and, when `alpha` is given, `P_{αH²} f`.
pub fn projections_laurent(f: &CircleFunction, alpha: Option<&BlaschkeProduct>) -> LaurentProjections {
    LaurentProjections {
        plus: f.p_plus(),
        minus: f.p_minus(),
        inner_multiple: alpha.map(|a| f.p_inner_multiple(a)),
    }
}
