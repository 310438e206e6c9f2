//! Truncated Toeplitz operators `A_φ^{θ,α} = P_α M_φ|K_θ`, compressed shifts
//! and the Nehari distance `dist(φ, αH^∞)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::circle::{common_grid, CircleFunction};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, singular_values, svd_sorted, CMatrix, CVector};
use crate::matrix::OperatorMatrix;
pub use crate::matrix::{adjoint, operator_norm};
use crate::modelspace::{conjugation_matrix, k0, ModelBasis};

/// Bases of several model spaces on one shared grid, adequate for all of
/// them and at least `requested` points.
pub fn model_bases(products: &[&BlaschkeProduct], requested: usize) -> Result<Vec<ModelBasis>> {
    let n = common_grid(products, requested);
    products.iter().map(|b| ModelBasis::new(b, n)).collect()
}

fn check_grid(phi: &CircleFunction, basis: &ModelBasis) -> Result<()> {
    if phi.len() != basis.grid_size() {
        return Err(Error::GridMismatch {
            left: phi.len(),
            right: basis.grid_size(),
        });
    }
    Ok(())
}

/// Matrix of `A_φ^{θ,α}` from the `K_θ` basis to the `K_α` basis, entries
/// `⟨φ e_j^θ, e_i^α⟩` by trapezoidal quadrature.
pub fn atto_matrix(phi: &CircleFunction, theta: &ModelBasis, alpha: &ModelBasis) -> Result<OperatorMatrix> {
    check_grid(phi, theta)?;
    check_grid(phi, alpha)?;
    let mut weighted = theta.samples().clone();
    for (r, mut row) in weighted.row_iter_mut().enumerate() {
        row *= phi.samples()[r];
    }
    let entries = (alpha.samples().adjoint() * weighted).unscale(phi.len() as f64);
    Ok(OperatorMatrix::new(entries, theta.tag(), alpha.tag()))
}

/// `S_θ = A_z^θ`.
pub fn compressed_shift(basis: &ModelBasis) -> OperatorMatrix {
    let z = CircleFunction::monomial(basis.grid_size(), 1);
    atto_matrix(&z, basis, basis).expect("same grid")
}

/// Result of [`analytic_defect`].
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticDefect {
    #[serde(skip)]
    pub defect: CMatrix,
    pub sigma1: f64,
    pub sigma2: f64,
    /// `1 − |cos ∠(v₁, k₀^θ)|` for the top right singular vector.
    pub kernel_misalignment: f64,
    /// Coordinates of `ψ ∈ K_α` when `D = ψ ⊗ k₀^θ`.
    #[serde(skip)]
    pub psi: Option<CVector>,
}

impl AnalyticDefect {
    pub fn is_rank_one_on_k0(&self) -> bool {
        self.psi.is_some()
    }
}

/// `D = A − S_α A S_θ*` and a test of `D = ψ ⊗ k₀^θ`.
pub fn analytic_defect(a: &OperatorMatrix, theta: &ModelBasis, alpha: &ModelBasis) -> Result<AnalyticDefect> {
    let s_theta = compressed_shift(theta);
    let s_alpha = compressed_shift(alpha);
    let sas = s_alpha.compose(a)?.compose(&s_theta.adjoint())?;
    let defect = &a.entries - &sas.entries;
    let k = theta.coefficients(&k0(theta.theta(), theta.grid_size()))?;
    let (_, s, v) = svd_sorted(&defect);
    let sigma1 = s.first().copied().unwrap_or(0.0);
    let sigma2 = s.get(1).copied().unwrap_or(0.0);
    if sigma1 < 1e-12 {
        return Ok(AnalyticDefect {
            psi: Some(CVector::zeros(alpha.dim())),
            defect,
            sigma1,
            sigma2,
            kernel_misalignment: 0.0,
        });
    }
    let cos = v.column(0).dotc(&k).norm() / k.norm();
    let misalignment = 1.0 - cos;
    let psi = (sigma2 / sigma1 < 1e-9 && misalignment < 1e-9).then(|| &defect * &k / Complex64::new(k.norm_squared(), 0.0));
    Ok(AnalyticDefect {
        defect,
        sigma1,
        sigma2,
        kernel_misalignment: misalignment,
        psi,
    })
}

/// `T_{φ̄}` restricted to `K_α` with values expressed in the `K_θ` basis,
/// together with the part of `P⁺(φ̄ f)` that leaves `K_θ` (relative, max over
/// basis vectors). When α divides θ and φ is analytic the leak vanishes.
pub fn coanalytic_toeplitz_restriction(
    phi: &CircleFunction,
    alpha: &ModelBasis,
    theta: &ModelBasis,
) -> Result<(OperatorMatrix, f64)> {
    check_grid(phi, alpha)?;
    check_grid(phi, theta)?;
    let phi_bar = phi.conj();
    let mut entries = CMatrix::zeros(theta.dim(), alpha.dim());
    let mut leak: f64 = 0.0;
    for j in 0..alpha.dim() {
        let image = (&phi_bar * &alpha.function(j)).p_plus();
        let coords = theta.coefficients(&image)?;
        let back = theta.synthesize(&coords);
        let scale = image.norm().max(1e-300);
        leak = leak.max((&image - &back).norm() / scale);
        entries.set_column(j, &coords);
    }
    Ok((OperatorMatrix::new(entries, alpha.tag(), theta.tag()), leak))
}

/// `‖C_α · conj(A_φ) − A_{αφ̄θ̄} · C_θ‖`, the matrix form of
/// `C_α A_φ^{θ,α} = A_{αφ̄θ̄}^{θ,α} C_θ`.
pub fn conjugation_identity_residual(phi: &CircleFunction, theta: &ModelBasis, alpha: &ModelBasis) -> Result<f64> {
    let n = phi.len();
    let a = atto_matrix(phi, theta, alpha)?;
    let al = CircleFunction::from_blaschke(n, alpha.theta());
    let th = CircleFunction::from_blaschke(n, theta.theta());
    let twisted = &(&al * &phi.conj()) * &th.conj();
    let b = atto_matrix(&twisted, theta, alpha)?;
    let lhs = conjugation_matrix(alpha).compose(&a)?;
    let rhs = b.compose(&conjugation_matrix(theta))?;
    Ok(frobenius(&(lhs.entries - rhs.entries)))
}

/// Truncation sizes for the Hankel norm.
pub const HANKEL_SCHEDULE: [usize; 5] = [64, 128, 256, 512, 1024];

#[derive(Clone, Debug, Serialize)]
pub struct NehariDistance {
    pub value: f64,
    /// Truncation size at which consecutive norms agreed.
    pub size: usize,
    pub history: Vec<f64>,
}

/// Norm of the `m × m` Hankel section `Γ_{jk} = ĉ_{−(j+k+1)}` of `ψ`.
fn hankel_section_norm(psi: &CircleFunction, m: usize) -> f64 {
    let c: Vec<Complex64> = (0..2 * m).map(|k| psi.coeff(-(k as i64) - 1)).collect();
    let used = c.iter().rposition(|v| v.norm() > 0.0).map_or(0, |p| p + 1);
    if used == 0 {
        return 0.0;
    }
    // rows/cols beyond the support contribute zero blocks
    let size = m.min(used);
    let h = CMatrix::from_fn(size, size, |j, k| c[j + k]);
    singular_values(&h)[0]
}

/// `dist(φ, αH^∞) = ‖H_{ᾱφ}‖` via truncated Hankel matrices of growing
/// size.
pub fn dist_to_alpha_hinf(phi: &CircleFunction, alpha: &BlaschkeProduct, schedule: &[usize]) -> Result<NehariDistance> {
    let a = CircleFunction::from_blaschke(phi.len(), alpha);
    let psi = &a.conj() * phi;
    let mut history = Vec::with_capacity(schedule.len());
    for &m in schedule {
        let value = hankel_section_norm(&psi, m);
        if let Some(&prev) = history.last() {
            let prev: f64 = prev;
            if (value - prev).abs() < 1e-8 {
                history.push(value);
                return Ok(NehariDistance { value, size: m, history });
            }
        }
        history.push(value);
    }
    let k = history.len();
    Err(Error::NoConvergence {
        prev: if k >= 2 { history[k - 2] } else { f64::NAN },
        last: history.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::DEFAULT_GRID;
    use crate::modelspace::{k0_tilde, tm_basis};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> (ModelBasis, ModelBasis) {
        let mut v = model_bases(&[theta, alpha], DEFAULT_GRID).unwrap();
        let a = v.pop().unwrap();
        (v.pop().unwrap(), a)
    }

    #[test]
    fn identity_symbol() {
        let theta = BlaschkeProduct::random(4, 2, 0.8);
        let b = tm_basis(&theta, DEFAULT_GRID).unwrap();
        let one = CircleFunction::constant(b.grid_size(), c(1.0, 0.0));
        let a = atto_matrix(&one, &b, &b).unwrap();
        assert!(frobenius(&(a.entries - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn shift_on_monomials_is_jordan() {
        let b = tm_basis(&BlaschkeProduct::monomial(3), 64).unwrap();
        let s = compressed_shift(&b);
        let jordan = CMatrix::from_fn(3, 3, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(frobenius(&(s.entries - jordan)) < 1e-14);
    }

    #[test]
    fn shift_matches_explicit_formula() {
        // S_θ f = z f − ⟨f, k̃₀⟩ θ
        let theta = BlaschkeProduct::random(5, 4, 0.85);
        let b = tm_basis(&theta, DEFAULT_GRID).unwrap();
        let n = b.grid_size();
        let s = compressed_shift(&b);
        let z = CircleFunction::monomial(n, 1);
        let t = CircleFunction::from_blaschke(n, &theta);
        let kt = k0_tilde(&theta, n);
        for j in 0..5 {
            let f = b.function(j);
            let expect = &(&z * &f) - &t.scale(f.inner(&kt));
            let got = b.synthesize(&s.entries.column(j).into_owned());
            assert!(got.max_abs_diff(&expect) < 1e-10);
        }
        // contraction with rank-one defect
        let sv = singular_values(&(CMatrix::identity(5, 5) - s.entries.adjoint() * &s.entries));
        assert!(s.norm() <= 1.0 + 1e-12);
        assert!(sv[1] < 1e-10 && sv[0] > 1e-3);
    }

    #[test]
    fn alpha_multiples_give_zero() {
        let theta = BlaschkeProduct::random(3, 5, 0.7);
        let alpha = BlaschkeProduct::random(2, 6, 0.7);
        let (tb, ab) = pair(&theta, &alpha);
        let n = tb.grid_size();
        let h = CircleFunction::from_laurent(n, &[(0, c(1.0, 1.0)), (2, c(-0.5, 0.0))]);
        let phi = &CircleFunction::from_blaschke(n, &alpha) * &h;
        assert!(atto_matrix(&phi, &tb, &ab).unwrap().norm() < 1e-10);
    }

    #[test]
    fn adjoint_swaps_symbol() {
        let theta = BlaschkeProduct::random(3, 7, 0.8);
        let alpha = BlaschkeProduct::random(4, 8, 0.8);
        let (tb, ab) = pair(&theta, &alpha);
        let n = tb.grid_size();
        let phi = CircleFunction::from_laurent(n, &[(-2, c(0.3, 0.1)), (0, c(1.0, 0.0)), (3, c(0.0, -0.7))]);
        let a = atto_matrix(&phi, &tb, &ab).unwrap();
        let b = atto_matrix(&phi.conj(), &ab, &tb).unwrap();
        assert!(frobenius(&(adjoint(&a).entries - b.entries)) < 1e-10);
    }

    #[test]
    fn adjoint_is_coanalytic_toeplitz_when_alpha_divides_theta() {
        let alpha = BlaschkeProduct::from_zeros(&[c(0.2, 0.4), c(-0.5, 0.1)]);
        let theta = alpha.multiply(&BlaschkeProduct::from_zeros(&[c(0.6, -0.3)]));
        let (tb, ab) = pair(&theta, &alpha);
        let n = tb.grid_size();
        let phi = CircleFunction::from_laurent(n, &[(0, c(0.5, 0.0)), (1, c(1.0, -0.2)), (4, c(0.3, 0.3))]);
        let a = atto_matrix(&phi, &tb, &ab).unwrap();
        let (t, leak) = coanalytic_toeplitz_restriction(&phi, &ab, &tb).unwrap();
        assert!(leak < 1e-10);
        assert!(frobenius(&(adjoint(&a).entries - t.entries)) < 1e-10);
    }

    #[test]
    fn analytic_defect_recovers_symbol() {
        let theta = BlaschkeProduct::random(4, 9, 0.8);
        let alpha = BlaschkeProduct::random(3, 10, 0.8);
        let (tb, ab) = pair(&theta, &alpha);
        let coords = CVector::from_vec(vec![c(1.0, 0.2), c(-0.4, 0.0), c(0.3, 0.9)]);
        let psi = ab.synthesize(&coords);
        let a = atto_matrix(&psi, &tb, &ab).unwrap();
        let d = analytic_defect(&a, &tb, &ab).unwrap();
        let got = d.psi.expect("rank one");
        assert!((got - coords).norm() < 1e-9);

        let zero = OperatorMatrix::zeros(tb.tag(), ab.tag());
        let d0 = analytic_defect(&zero, &tb, &ab).unwrap();
        assert!(d0.psi.unwrap().norm() == 0.0);

        let dense = CMatrix::from_fn(3, 4, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0));
        let d1 = analytic_defect(&OperatorMatrix::new(dense, tb.tag(), ab.tag()), &tb, &ab).unwrap();
        assert!(!d1.is_rank_one_on_k0());
        assert!(d1.sigma2 > 1e-3);
    }

    #[test]
    fn conjugation_identity_holds() {
        let theta = BlaschkeProduct::random(3, 12, 0.8);
        let alpha = BlaschkeProduct::random(4, 13, 0.8);
        let (tb, ab) = pair(&theta, &alpha);
        let n = tb.grid_size();
        let phi = CircleFunction::from_laurent(n, &[(-3, c(0.2, 0.5)), (1, c(1.0, 0.0)), (2, c(0.0, 0.4))]);
        assert!(conjugation_identity_residual(&phi, &tb, &ab).unwrap() < 1e-9);
    }

    #[test]
    fn nehari_simple_cases() {
        let n = DEFAULT_GRID;
        let phi = CircleFunction::monomial(n, 2);
        let d = dist_to_alpha_hinf(&phi, &BlaschkeProduct::monomial(3), &HANKEL_SCHEDULE).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12);
        let alpha = BlaschkeProduct::random(2, 1, 0.6);
        let member = &CircleFunction::from_blaschke(n, &alpha) * &CircleFunction::from_laurent(n, &[(0, c(1.0, 0.0)), (1, c(2.0, 0.0))]);
        let d = dist_to_alpha_hinf(&member, &alpha, &HANKEL_SCHEDULE).unwrap();
        assert!(d.value < 1e-8);
    }

    #[test]
    fn nehari_matches_norm_for_intertwiner_symbol() {
        // α | θ: a symbol in K_α gives an intertwiner
        let alpha = BlaschkeProduct::from_zeros(&[c(0.3, 0.2), c(-0.4, 0.5)]);
        let theta = alpha.multiply(&BlaschkeProduct::mobius(c(0.1, -0.6)));
        let (tb, ab) = pair(&theta, &alpha);
        let phi = ab.synthesize(&CVector::from_vec(vec![c(0.7, 0.1), c(-0.2, 0.5)]));
        let norm = atto_matrix(&phi, &tb, &ab).unwrap().norm();
        let d = dist_to_alpha_hinf(&phi, &alpha, &HANKEL_SCHEDULE).unwrap();
        assert!((norm - d.value).abs() < 1e-6, "{norm} vs {}", d.value);
    }
}
