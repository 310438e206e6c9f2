//! Dense complex linear-algebra helpers. Matrices are nalgebra's; the
//! singular value decomposition comes from faer, since nalgebra's complex
//! SVD returns wrong factors for some rank-deficient inputs.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Full SVD: `(U, σ, V)` with square `U`, `V`, σ descending and
/// `m = U diag(σ) V*` (σ padded with zeros on the long side).
fn svd_full(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    let a = Mat::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = a.svd().expect("SVD converges for finite input");
    let (u, v, d) = (svd.U(), svd.V(), svd.S().column_vector());
    let mut order: Vec<usize> = (0..r.min(c)).collect();
    order.sort_by(|&x, &y| d[y].re.total_cmp(&d[x].re));
    let s = order.iter().map(|&i| d[i].re).collect();
    let perm = |k: usize| order.get(k).copied().unwrap_or(k);
    let u = CMatrix::from_fn(r, r, |i, k| u[(i, perm(k))]);
    let v = CMatrix::from_fn(c, c, |i, k| v[(i, perm(k))]);
    (u, s, v)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let a = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut s: Vec<f64> = a.singular_values().expect("SVD converges for finite input");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Thin SVD with factors sorted by descending singular value.
/// Returns `(U, σ, V)` with `m = U diag(σ) V*`.
pub fn svd_sorted(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (CMatrix::zeros(m.nrows(), 0), Vec::new(), CMatrix::zeros(m.ncols(), 0));
    }
    let (u, s, v) = svd_full(m);
    (u.columns(0, k).into_owned(), s, v.columns(0, k).into_owned())
}

/// Orthonormal basis of the null space of `m`: right singular vectors whose
/// singular value is below `rel_tol · σ_max`.
pub fn nullspace(m: &CMatrix, rel_tol: f64) -> CMatrix {
    kernel(m, |smax| rel_tol * smax)
}

/// As [`nullspace`] with the cut at `rel_tol · max(σ_max, scale)`, for
/// systems whose natural size is known: a system that is zero up to rounding
/// then has a full null space instead of an empty one.
pub fn nullspace_scaled(m: &CMatrix, rel_tol: f64, scale: f64) -> CMatrix {
    kernel(m, |smax| rel_tol * smax.max(scale))
}

fn kernel(m: &CMatrix, cut: impl Fn(f64) -> f64) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let (_, s, v) = svd_full(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let threshold = cut(smax);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| smax == 0.0 || s.get(i).is_none_or(|&x| x < threshold))
        .collect();
    CMatrix::from_fn(cols, keep.len(), |r, c| v[(r, keep[c])])
}

/// Orthonormal basis of the column span of `m` (rank cut `rel_tol · σ_max`).
pub fn orth(m: &CMatrix, rel_tol: f64) -> CMatrix {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let (u, s, _) = svd_sorted(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| smax > 0.0 && v > rel_tol * smax).count();
    u.columns(0, rank).into_owned()
}

/// Cosines of the principal angles between the spans of two matrices with
/// orthonormal columns, with the corresponding vectors in the first span.
pub fn principal_cosines(q1: &CMatrix, q2: &CMatrix) -> (Vec<f64>, CMatrix) {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return (Vec::new(), CMatrix::zeros(q1.nrows(), 0));
    }
    let cross = q1.adjoint() * q2;
    let (u, s, _) = svd_sorted(&cross);
    (s, q1 * u)
}

/// `‖P₁ − P₂‖₂` for the orthogonal projections onto the column spans.
pub fn subspace_distance(q1: &CMatrix, q2: &CMatrix) -> f64 {
    let n = q1.nrows().max(q2.nrows());
    let proj = |q: &CMatrix| {
        if q.ncols() == 0 {
            CMatrix::zeros(n, n)
        } else {
            q * q.adjoint()
        }
    };
    spectral_norm(&(proj(q1) - proj(q2)))
}

/// Column-major `vec` of a matrix.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Matrix of `X ↦ L X − X R` acting on column-major `vec(X)`.
pub fn sylvester_operator(left: &CMatrix, right: &CMatrix) -> CMatrix {
    let m = left.nrows();
    let n = right.nrows();
    let eye_n = CMatrix::identity(n, n);
    let eye_m = CMatrix::identity(m, m);
    eye_n.kronecker(left) - right.transpose().kronecker(&eye_m)
}

/// `x ⊗ y` as the matrix `x y*`, i.e. `f ↦ ⟨f, y⟩ x`.
pub fn rank_one(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sorted_svd_reconstructs() {
        let m = CMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(3.0, 1.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, -1.0)]);
        let (u, s, v) = svd_sorted(&m);
        assert!(s[0] >= s[1]);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&x| c(x, 0.0))));
        assert!(frobenius(&(&u * d * v.adjoint() - &m)) < 1e-12);
    }

    fn arb_matrix() -> impl Strategy<Value = CMatrix> {
        (1usize..9, 1usize..9).prop_flat_map(|(r, c)| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), r * c)
                .prop_map(move |v| CMatrix::from_iterator(r, c, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
        })
    }

    /// Rank-one inputs broke nalgebra's complex SVD; keep them covered.
    fn arb_low_rank() -> impl Strategy<Value = CMatrix> {
        (arb_matrix(), 1usize..3).prop_map(|(m, rank)| {
            let (u, s, v) = svd_sorted(&m);
            let k = rank.min(s.len());
            let d = CMatrix::from_diagonal(&CVector::from_iterator(k, s[..k].iter().map(|&x| c(x, 0.0))));
            u.columns(0, k) * d * v.columns(0, k).adjoint()
        })
    }

    proptest! {
        #[test]
        fn svd_reconstructs_low_rank(m in arb_low_rank()) {
            let (u, s, v) = svd_sorted(&m);
            let d = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&x| c(x, 0.0))));
            prop_assert!(frobenius(&(&u * d * v.adjoint() - &m)) < 1e-12);
            let ns = nullspace(&m, 1e-10);
            prop_assert!(frobenius(&(&m * &ns)) < 1e-12);
        }

        #[test]
        fn svd_reconstructs_any_shape(m in arb_matrix()) {
            let (u, s, v) = svd_sorted(&m);
            let d = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&x| c(x, 0.0))));
            prop_assert!(frobenius(&(&u * d * v.adjoint() - &m)) < 1e-12);
            let direct = singular_values(&m);
            prop_assert!((direct[0] - s[0]).abs() < 1e-12);
            prop_assert!((direct[0] - singular_values(&m.adjoint())[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn nullspace_of_rank_deficient() {
        let m = CMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let ns = nullspace(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!(frobenius(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn sylvester_vectorization_matches() {
        let l = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let r = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0));
        let x = CMatrix::from_fn(2, 3, |i, j| c(i as f64 - j as f64, 0.5));
        let direct = &l * &x - &x * &r;
        let via = sylvester_operator(&l, &r) * vectorize(&x);
        assert!(frobenius(&(unvectorize(&via, 2, 3) - direct)) < 1e-12);
    }

    #[test]
    fn rank_one_norm() {
        let x = CVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let y = CVector::from_vec(vec![c(1.0, 1.0)]);
        assert!((spectral_norm(&rank_one(&x, &y)) - 5.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
