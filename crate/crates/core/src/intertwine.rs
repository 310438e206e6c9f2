//! Intertwiners of compressed shifts: `S_α A = A S_θ`, the starred and the
//! truncated-Hankel variants, their symbols, and the lattice identity
//! `αK_θ ∩ θK_α = lcm(α,θ) K_{gcd(α,θ)}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::linalg::{nullspace_scaled, principal_cosines, rank_one, subspace_distance, sylvester_operator, unvectorize, CMatrix};
use crate::matrix::OperatorMatrix;
use crate::modelspace::{conjugation_matrix, jsharp_matrix, k0, k0_tilde, ModelBasis, MultipliedModelSpace};
use crate::operators::{atto_matrix, compressed_shift};

/// Relative singular-value cutoff for Sylvester nullspaces.
pub const RANK_TOL: f64 = 1e-10;

/// Residual bound for accepting an operator as an intertwiner.
pub const INTERTWINE_TOL: f64 = 1e-8;

fn nullspace_operators(system: &CMatrix, rows: usize, cols: usize, domain: &ModelBasis, codomain: &ModelBasis, rank_tol: f64) -> Vec<OperatorMatrix> {
    // compressed shifts are contractions, so the system has size about 1
    let ns = nullspace_scaled(system, rank_tol, 1.0);
    (0..ns.ncols())
        .map(|k| {
            let x = unvectorize(&ns.column(k).into_owned(), rows, cols);
            OperatorMatrix::new(x, domain.tag(), codomain.tag())
        })
        .collect()
}

/// Orthonormal (Frobenius) basis of `{A : S_α A = A S_θ}`.
pub fn solve_intertwiners(theta: &ModelBasis, alpha: &ModelBasis, rank_tol: f64) -> Vec<OperatorMatrix> {
    let s_alpha = compressed_shift(alpha).entries;
    let s_theta = compressed_shift(theta).entries;
    let system = sylvester_operator(&s_alpha, &s_theta);
    nullspace_operators(&system, alpha.dim(), theta.dim(), theta, alpha, rank_tol)
}

/// Orthonormal basis of `{A : S_α* A = A S_θ*}`.
pub fn solve_star_intertwiners(theta: &ModelBasis, alpha: &ModelBasis, rank_tol: f64) -> Vec<OperatorMatrix> {
    let s_alpha = compressed_shift(alpha).entries.adjoint();
    let s_theta = compressed_shift(theta).entries.adjoint();
    let system = sylvester_operator(&s_alpha, &s_theta);
    nullspace_operators(&system, alpha.dim(), theta.dim(), theta, alpha, rank_tol)
}

/// Orthonormal basis of `{B : S_α B = B S_θ*}`.
pub fn solve_sts(theta: &ModelBasis, alpha: &ModelBasis, rank_tol: f64) -> Vec<OperatorMatrix> {
    let s_alpha = compressed_shift(alpha).entries;
    let s_theta = compressed_shift(theta).entries.adjoint();
    let system = sylvester_operator(&s_alpha, &s_theta);
    nullspace_operators(&system, alpha.dim(), theta.dim(), theta, alpha, rank_tol)
}

/// Orthonormal basis of `{B : S_α* B = B S_θ}`.
pub fn solve_sst(theta: &ModelBasis, alpha: &ModelBasis, rank_tol: f64) -> Vec<OperatorMatrix> {
    let s_alpha = compressed_shift(alpha).entries.adjoint();
    let s_theta = compressed_shift(theta).entries;
    let system = sylvester_operator(&s_alpha, &s_theta);
    nullspace_operators(&system, alpha.dim(), theta.dim(), theta, alpha, rank_tol)
}

/// Which pair of shifts an operator is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `S_α A = A S_θ`
    Plain,
    /// `S_α* A = A S_θ*`
    Star,
    /// `S_α B = B S_θ*`
    Sts,
    /// `S_α* B = B S_θ`
    Sst,
}

/// `‖L A − A R‖₂` for the shift pair selected by `relation`.
pub fn relation_residual(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis, relation: Relation) -> f64 {
    let s_alpha = compressed_shift(alpha).entries;
    let s_theta = compressed_shift(theta).entries;
    let (l, r) = match relation {
        Relation::Plain => (s_alpha, s_theta),
        Relation::Star => (s_alpha.adjoint(), s_theta.adjoint()),
        Relation::Sts => (s_alpha, s_theta.adjoint()),
        Relation::Sst => (s_alpha.adjoint(), s_theta),
    };
    let m = if a.antilinear {
        // an antilinear A commutes with a linear map L as L A x = L M x̄,
        // A R x = M conj(R) x̄
        &l * &a.entries - &a.entries * r.conjugate()
    } else {
        &l * &a.entries - &a.entries * r
    };
    crate::linalg::spectral_norm(&m)
}

pub fn intertwining_residual(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis) -> f64 {
    relation_residual(a, theta, alpha, Relation::Plain)
}

fn require(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis, relation: Relation) -> Result<()> {
    let r = relation_residual(a, theta, alpha, relation);
    if r < INTERTWINE_TOL * a.norm().max(1.0) {
        Ok(())
    } else {
        Err(Error::NotAnIntertwiner(r))
    }
}

/// `φ = A k₀^θ ∈ K_α`, the symbol of an intertwiner.
pub fn symbol_of_intertwiner(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis) -> Result<CircleFunction> {
    require(a, theta, alpha, Relation::Plain)?;
    let k = theta.coefficients(&k0(theta.theta(), theta.grid_size()))?;
    Ok(alpha.synthesize(&a.apply(&k)))
}

/// Relative distance of φ from `(α/γ) K_γ`, γ = gcd(α, θ).
pub fn membership_residual(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<f64> {
    let gamma = alpha.gcd(theta);
    let outer = alpha.divide(&gamma)?;
    let space = MultipliedModelSpace::new(&outer, &gamma, phi.len())?;
    if space.dim() == 0 {
        return Ok(if phi.norm() == 0.0 { 0.0 } else { 1.0 });
    }
    space.residual(phi)
}

/// Both sides of `S_α A_φ − A_φ S_θ = P_α(φθ) ⊗ k̃₀^θ − k₀^α ⊗ P_θ(z̄φ̄)`.
#[derive(Clone, Debug)]
pub struct CommutatorDefect {
    pub defect: CMatrix,
    pub formula: CMatrix,
    pub residual: f64,
}

pub fn commutator_defect(phi: &CircleFunction, theta: &ModelBasis, alpha: &ModelBasis) -> Result<CommutatorDefect> {
    let n = phi.len();
    let a = atto_matrix(phi, theta, alpha)?;
    let lhs = compressed_shift(alpha).compose(&a)?.entries - &a.entries * compressed_shift(theta).entries;
    let th = CircleFunction::from_blaschke(n, theta.theta());
    let zbar = CircleFunction::monomial(n, -1);
    let x1 = alpha.coefficients(&(phi * &th))?;
    let y1 = theta.coefficients(&k0_tilde(theta.theta(), n))?;
    let x2 = alpha.coefficients(&k0(alpha.theta(), n))?;
    let y2 = theta.coefficients(&(&zbar * &phi.conj()))?;
    let rhs = rank_one(&x1, &y1) - rank_one(&x2, &y2);
    let residual = crate::linalg::frobenius(&(&lhs - &rhs));
    Ok(CommutatorDefect {
        defect: lhs,
        formula: rhs,
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Cancellation {
    pub cancels: bool,
    pub c: Complex64,
    /// `‖P_η(φθ − c)‖` for the fitted `c`, η = lcm(α, θ).
    pub residual: f64,
}

/// Whether `(φθ − c) ⊥ K_{lcm(α,θ)}` for some constant `c` (least squares).
pub fn cancellation_test(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct, tol: f64) -> Result<Cancellation> {
    let n = phi.len();
    let eta = alpha.lcm(theta);
    let basis = ModelBasis::new(&eta, n)?;
    if basis.grid_size() != n {
        return Err(Error::GridMismatch {
            left: n,
            right: basis.grid_size(),
        });
    }
    let th = CircleFunction::from_blaschke(n, theta);
    let v = basis.coefficients(&(phi * &th))?;
    let k = basis.coefficients(&k0(&eta, n))?;
    let c = k.dotc(&v) / Complex64::new(k.norm_squared(), 0.0);
    let residual = (&v - &k * c).norm();
    Ok(Cancellation {
        cancels: residual < tol,
        c,
        residual,
    })
}

/// Result of [`intersection_subspace`].
#[derive(Clone, Debug)]
pub struct Intersection {
    /// Grid samples of an orthonormal basis, one column per vector.
    pub basis: CMatrix,
    pub cosines: Vec<f64>,
    /// `‖P_∩ − P_{lcm·K_gcd}‖₂`.
    pub distance: f64,
}

impl Intersection {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// `αK_θ ∩ θK_α` by principal angles inside `K_{αθ}`, with its distance to
/// `lcm(α,θ)·K_{gcd(α,θ)}`.
pub fn intersection_subspace(theta: &BlaschkeProduct, alpha: &BlaschkeProduct, grid: usize, cos_tol: f64) -> Result<Intersection> {
    let product = alpha.multiply(theta);
    let big = ModelBasis::new(&product, grid)?;
    let n = big.grid_size();
    let coords = |space: &MultipliedModelSpace| -> CMatrix { (big.samples().adjoint() * space.samples()).unscale(n as f64) };
    let q1 = coords(&MultipliedModelSpace::new(alpha, theta, n)?);
    let q2 = coords(&MultipliedModelSpace::new(theta, alpha, n)?);
    let gamma = alpha.gcd(theta);
    let q3 = coords(&MultipliedModelSpace::new(&alpha.lcm(theta), &gamma, n)?);
    let (cosines, vectors) = principal_cosines(&q1, &q2);
    let dim = cosines.iter().filter(|&&c| c > 1.0 - cos_tol).count();
    let inter = vectors.columns(0, dim).into_owned();
    let distance = subspace_distance(&inter, &q3);
    Ok(Intersection {
        basis: big.samples() * inter,
        cosines,
        distance,
    })
}

/// `A′ = C_α A C_θ`, which takes solutions of `S_α A = A S_θ` to solutions
/// of `S_α* A′ = A′ S_θ*`.
pub fn star_transform(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis) -> Result<OperatorMatrix> {
    require(a, theta, alpha, Relation::Plain)?;
    let out = conjugation_matrix(alpha).compose(a)?.compose(&conjugation_matrix(theta))?;
    require(&out, theta, alpha, Relation::Star)?;
    Ok(out)
}

/// `B = J^# A C_θ` for `A` intertwining `S_{α^#}` and `S_θ`; `B` satisfies
/// `S_α B = B S_θ*`.
pub fn hankel_transform(a: &OperatorMatrix, theta: &ModelBasis, alpha_sharp: &ModelBasis, alpha: &ModelBasis) -> Result<OperatorMatrix> {
    require(a, theta, alpha_sharp, Relation::Plain)?;
    let j = jsharp_matrix(alpha_sharp, alpha)?;
    let out = j.compose(a)?.compose(&conjugation_matrix(theta))?;
    require(&out, theta, alpha, Relation::Sts)?;
    Ok(out)
}

/// `B = C_α J^# A` for `A` intertwining `S_{α^#}` and `S_θ`; `B` satisfies
/// `S_α* B = B S_θ`.
pub fn sst_transform(a: &OperatorMatrix, theta: &ModelBasis, alpha_sharp: &ModelBasis, alpha: &ModelBasis) -> Result<OperatorMatrix> {
    require(a, theta, alpha_sharp, Relation::Plain)?;
    let j = jsharp_matrix(alpha_sharp, alpha)?;
    let out = conjugation_matrix(alpha).compose(&j)?.compose(a)?;
    require(&out, theta, alpha, Relation::Sst)?;
    Ok(out)
}

/// `σ_min / σ_max` of the operators stacked as vectorized columns; zero
/// when they are linearly dependent.
pub fn image_conditioning(images: &[OperatorMatrix]) -> f64 {
    if images.is_empty() {
        return 1.0;
    }
    let rows = images[0].rows() * images[0].cols();
    let m = CMatrix::from_fn(rows, images.len(), |r, c| images[c].entries.as_slice()[r]);
    let s = crate::linalg::singular_values(&m);
    s.last().copied().unwrap_or(0.0) / s[0].max(1e-300)
}

/// `‖P_X − P_Y‖₂` for the spans of two operator families (vectorized).
pub fn span_distance(x: &[OperatorMatrix], y: &[OperatorMatrix]) -> f64 {
    let to_q = |ops: &[OperatorMatrix], rows: usize| -> CMatrix {
        let m = CMatrix::from_fn(rows, ops.len(), |r, c| ops[c].entries.as_slice()[r]);
        crate::linalg::orth(&m, RANK_TOL)
    };
    let rows = x.first().or(y.first()).map_or(0, |o| o.rows() * o.cols());
    if rows == 0 {
        return 0.0;
    }
    subspace_distance(&to_q(x, rows), &to_q(y, rows))
}
