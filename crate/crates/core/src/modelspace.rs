//! Model spaces `K_θ = H² ⊖ θH²` for finite Blaschke products.
//!
//! The basis is the Takenaka–Malmquist system built from the canonical zero
//! list `a_1, …, a_n` of θ:
//!
//! `e_k(z) = √(1−|a_k|²)/(1 − ā_k z) · ∏_{j<k} (z − a_j)/(1 − ā_j z)`.
//!
//! For `θ = zⁿ` this is exactly `1, z, …, z^{n−1}`. Inner products use the
//! trapezoidal rule on the grid, which is spectrally accurate for these
//! rational functions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::circle::{adequate_grid, CircleFunction};
use crate::error::{Error, Result};
use crate::linalg::{czero, CMatrix, CVector};
use crate::matrix::{OperatorMatrix, SpaceTag};

#[derive(Clone, Debug)]
pub struct ModelBasis {
    theta: BlaschkeProduct,
    nodes: Vec<Complex64>,
    samples: CMatrix,
}

/// `√(1−|a|²)/(1 − ā z)`.
fn szego(a: Complex64, z: Complex64) -> Complex64 {
    (1.0 - a.norm_sqr()).sqrt() / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// `(z − a)/(1 − ā z)`.
fn shifted_factor(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

impl ModelBasis {
    /// Basis of `K_θ` on a grid of at least `grid_size` points; the grid is
    /// doubled until the Fourier tail of θ is negligible.
    pub fn new(theta: &BlaschkeProduct, grid_size: usize) -> Result<Self> {
        if theta.degree() == 0 {
            return Err(Error::DegreeZero);
        }
        let n = adequate_grid(theta.max_modulus(), grid_size);
        let nodes = theta.zero_list();
        let points = crate::circle::grid_points(n);
        let mut samples = DMatrix::from_element(n, nodes.len(), czero());
        for (r, &z) in points.iter().enumerate() {
            let mut prefix = Complex64::new(1.0, 0.0);
            for (k, &a) in nodes.iter().enumerate() {
                samples[(r, k)] = szego(a, z) * prefix;
                prefix *= shifted_factor(a, z);
            }
        }
        Ok(Self {
            theta: theta.clone(),
            nodes,
            samples,
        })
    }

    pub fn theta(&self) -> &BlaschkeProduct {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn grid_size(&self) -> usize {
        self.samples.nrows()
    }

    pub fn tag(&self) -> SpaceTag {
        SpaceTag::Model(self.theta.clone())
    }

    /// Grid samples, one column per basis function.
    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    pub fn function(&self, k: usize) -> CircleFunction {
        CircleFunction::from_samples(self.samples.column(k).iter().copied().collect())
    }

    /// Closed-form value of `e_k` at any point of the closed disk.
    pub fn eval(&self, k: usize, w: Complex64) -> Complex64 {
        let prefix: Complex64 = self.nodes[..k].iter().map(|&a| shifted_factor(a, w)).product();
        szego(self.nodes[k], w) * prefix
    }

    pub fn gram(&self) -> CMatrix {
        (self.samples.adjoint() * &self.samples).unscale(self.grid_size() as f64)
    }

    /// Coordinates `⟨f, e_j⟩`.
    pub fn coefficients(&self, f: &CircleFunction) -> Result<CVector> {
        if f.len() != self.grid_size() {
            return Err(Error::GridMismatch {
                left: f.len(),
                right: self.grid_size(),
            });
        }
        let v = CVector::from_column_slice(f.samples());
        Ok((self.samples.adjoint() * v).unscale(self.grid_size() as f64))
    }

    pub fn synthesize(&self, coeffs: &CVector) -> CircleFunction {
        CircleFunction::from_samples((&self.samples * coeffs).iter().copied().collect())
    }

    /// `P_θ f` reconstructed from its coordinates.
    pub fn project(&self, f: &CircleFunction) -> Result<CircleFunction> {
        Ok(self.synthesize(&self.coefficients(f)?))
    }
}

pub fn tm_basis(theta: &BlaschkeProduct, grid_size: usize) -> Result<ModelBasis> {
    ModelBasis::new(theta, grid_size)
}

/// `k_w^θ(z) = (1 − conj(θ(w)) θ(z)) / (1 − w̄ z)`.
pub fn reproducing_kernel(theta: &BlaschkeProduct, w: Complex64, n: usize) -> CircleFunction {
    let tw = theta.eval_unchecked(w).conj();
    CircleFunction::from_fn(n, |z| {
        (Complex64::new(1.0, 0.0) - tw * theta.eval_unchecked(z)) / (Complex64::new(1.0, 0.0) - w.conj() * z)
    })
}

/// `k_0^θ = 1 − conj(θ(0)) θ = P_θ 1`.
pub fn k0(theta: &BlaschkeProduct, n: usize) -> CircleFunction {
    reproducing_kernel(theta, czero(), n)
}

/// `C_θ k_0^θ = z̄ (θ − θ(0))`.
pub fn k0_tilde(theta: &BlaschkeProduct, n: usize) -> CircleFunction {
    let t0 = theta.value_at_zero();
    CircleFunction::from_fn(n, |z| (theta.eval_unchecked(z) - t0) * z.conj())
}

pub fn project_model(f: &CircleFunction, basis: &ModelBasis) -> Result<CVector> {
    basis.coefficients(f)
}

/// Antilinear matrix of `C_θ f = θ z̄ f̄` on `K_θ`: coordinates `x` map to
/// `C · conj(x)`.
pub fn conjugation_matrix(basis: &ModelBasis) -> OperatorMatrix {
    let n = basis.grid_size();
    let mut entries = CMatrix::zeros(basis.dim(), basis.dim());
    for j in 0..basis.dim() {
        let image = basis.function(j).conjugation(basis.theta());
        let col = basis.coefficients(&image).expect("same grid");
        entries.set_column(j, &col);
    }
    debug_assert_eq!(n, basis.grid_size());
    OperatorMatrix::antilinear(entries, basis.tag(), basis.tag())
}

pub fn jsharp_map(f: &CircleFunction) -> CircleFunction {
    f.jsharp()
}

pub fn jsharp_blaschke(b: &BlaschkeProduct) -> BlaschkeProduct {
    b.jsharp()
}

/// Antilinear matrix of `J^#` from `K_α` (basis `from`) to `K_{α^#}`
/// (basis `to`).
pub fn jsharp_matrix(from: &ModelBasis, to: &ModelBasis) -> Result<OperatorMatrix> {
    if from.grid_size() != to.grid_size() {
        return Err(Error::GridMismatch {
            left: from.grid_size(),
            right: to.grid_size(),
        });
    }
    let mut entries = CMatrix::zeros(to.dim(), from.dim());
    for j in 0..from.dim() {
        entries.set_column(j, &to.coefficients(&from.function(j).jsharp())?);
    }
    Ok(OperatorMatrix::antilinear(entries, from.tag(), to.tag()))
}

/// The subspace `u · K_v` for inner `u`, `v`, with an orthonormal sampled
/// basis (multiplication by an inner function is isometric on `L²`).
#[derive(Clone, Debug)]
pub struct MultipliedModelSpace {
    samples: CMatrix,
}

impl MultipliedModelSpace {
    pub fn new(multiplier: &BlaschkeProduct, model: &BlaschkeProduct, n: usize) -> Result<Self> {
        if model.degree() == 0 {
            return Ok(Self {
                samples: CMatrix::zeros(n, 0),
            });
        }
        let basis = ModelBasis::new(model, n)?;
        if basis.grid_size() != n {
            return Err(Error::GridMismatch {
                left: basis.grid_size(),
                right: n,
            });
        }
        let u = CircleFunction::from_blaschke(n, multiplier);
        let mut samples = basis.samples().clone();
        for (r, mut row) in samples.row_iter_mut().enumerate() {
            row *= u.samples()[r];
        }
        Ok(Self { samples })
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn grid_size(&self) -> usize {
        self.samples.nrows()
    }

    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    pub fn function(&self, k: usize) -> CircleFunction {
        CircleFunction::from_samples(self.samples.column(k).iter().copied().collect())
    }

    pub fn coefficients(&self, f: &CircleFunction) -> CVector {
        let v = CVector::from_column_slice(f.samples());
        (self.samples.adjoint() * v).unscale(self.grid_size() as f64)
    }

    pub fn synthesize(&self, coeffs: &CVector) -> CircleFunction {
        CircleFunction::from_samples((&self.samples * coeffs).iter().copied().collect())
    }

    /// `‖f − Pf‖ / ‖f‖`, zero for `f = 0`.
    pub fn residual(&self, f: &CircleFunction) -> Result<f64> {
        if f.len() != self.grid_size() {
            return Err(Error::GridMismatch {
                left: f.len(),
                right: self.grid_size(),
            });
        }
        let norm = f.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let p = self.synthesize(&self.coefficients(f));
        Ok((f - &p).norm() / norm)
    }
}
