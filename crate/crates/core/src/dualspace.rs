//! Finite sections of `K_θ^⊥ = θH² ⊕ H²_-` and the block operators acting
//! between them.
//!
//! Coordinates are exact: the domain vector `e_hat(j)` is `θ z^j`
//! (`0 ≤ j < K`) and `e_check(k)` is `z^{-(k+1)}` (`0 ≤ k < L`); the codomain
//! uses α in place of θ. Both families are orthonormal in `L²`, so every
//! block entry is a single Laurent coefficient:
//!
//! ```text
//! T̂_ψ (i, j) = ĉ_{i−j}(ψθᾱ)        Γ̌_ψ (i, k) = ĉ_{i+k+1}(ψᾱ)
//! Γ̂_ψ (l, j) = ĉ_{−l−1−j}(ψθ)      Ť_ψ (l, k) = ĉ_{k−l}(ψ)
//! ```
//!
//! Truncation only damages rows near the top of each section, so identities
//! are asserted on interior columns, at least `guard` away from the top.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::circle::{grid_points, CircleFunction};
use crate::error::{Error, Result};
use crate::intertwine::membership_residual;
use crate::linalg::{czero, CMatrix, CVector};
use crate::modelspace::{k0, MultipliedModelSpace};

/// Coefficients below this (relative to `max(1, peak)`) count as tail when
/// sizing guards.
pub const BAND_TOL: f64 = 1e-14;

/// Values at the origin below this are treated as zero.
pub const ORIGIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentWindow {
    pub lo: i64,
    pub hi: i64,
    pub guard: usize,
    pub grid_size: usize,
}

impl LaurentWindow {
    pub const DEFAULT_LO: i64 = -128;
    pub const DEFAULT_HI: i64 = 192;

    /// Smallest grid that resolves every coefficient a window needs.
    pub fn grid_for(lo: i64, hi: i64) -> usize {
        (4 * (hi - lo) as usize).max(4096).next_power_of_two()
    }

    pub fn new(lo: i64, hi: i64, guard: usize) -> Result<Self> {
        if lo >= 0 || hi <= 0 {
            return Err(Error::WindowTooSmall(format!("need lo < 0 < hi, got ({lo}, {hi})")));
        }
        let w = Self {
            lo,
            hi,
            guard,
            grid_size: Self::grid_for(lo, hi),
        };
        if 2 * guard >= w.hat_len().min(w.check_len()) {
            return Err(Error::WindowTooSmall(format!(
                "guard {guard} leaves no interior in ({lo}, {hi})"
            )));
        }
        Ok(w)
    }

    pub fn default_with_guard(guard: usize) -> Self {
        Self {
            lo: Self::DEFAULT_LO,
            hi: Self::DEFAULT_HI,
            guard,
            grid_size: Self::grid_for(Self::DEFAULT_LO, Self::DEFAULT_HI),
        }
    }

    /// The window enlarged, if needed, so each section holds at least three
    /// guards.
    pub fn fitted(self, guard: usize) -> Self {
        let need = 3 * guard as i64;
        let lo = self.lo.min(-need);
        let hi = self.hi.max(need);
        Self {
            lo,
            hi,
            guard,
            grid_size: self.grid_size.max(Self::grid_for(lo, hi)),
        }
    }

    /// Doubles every extent and the grid.
    pub fn scaled(self, factor: usize) -> Self {
        let f = factor as i64;
        Self {
            lo: self.lo * f,
            hi: self.hi * f,
            guard: self.guard,
            grid_size: self.grid_size * factor,
        }
    }

    /// `K`, the number of `θ z^j` vectors.
    pub fn hat_len(&self) -> usize {
        self.hi as usize
    }

    /// `L`, the number of `z^{-k}` vectors.
    pub fn check_len(&self) -> usize {
        (-self.lo) as usize
    }

    pub fn dim(&self) -> usize {
        self.hat_len() + self.check_len()
    }

    pub fn hat(&self, j: usize) -> usize {
        j
    }

    pub fn check(&self, k: usize) -> usize {
        self.hat_len() + k
    }

    /// Interior column indices: hat `j < K − guard`, check `k < L − guard`.
    pub fn interior(&self) -> Vec<usize> {
        let k = self.hat_len().saturating_sub(self.guard);
        let l = self.check_len().saturating_sub(self.guard);
        (0..k).map(|j| self.hat(j)).chain((0..l).map(|c| self.check(c))).collect()
    }

    fn require_grid(&self, f: &CircleFunction) -> Result<()> {
        let needed = 2 * (self.dim() + 1);
        if f.len() < needed {
            return Err(Error::WindowTooSmall(format!(
                "window ({}, {}) needs a grid of at least {needed} points, symbol has {}",
                self.lo,
                self.hi,
                f.len()
            )));
        }
        Ok(())
    }
}

/// Sampled section bases of `K_θ^⊥` for a window (quadrature oracle for
/// the coefficient formulas).
#[derive(Clone, Debug)]
pub struct SectionBases {
    /// Columns `θ z^j`, `j < K`.
    pub hat: CMatrix,
    /// Columns `z^{-k}`, `1 ≤ k ≤ L`.
    pub check: CMatrix,
}

impl SectionBases {
    pub fn combined(&self) -> CMatrix {
        let n = self.hat.nrows();
        let mut m = CMatrix::zeros(n, self.hat.ncols() + self.check.ncols());
        m.columns_mut(0, self.hat.ncols()).copy_from(&self.hat);
        m.columns_mut(self.hat.ncols(), self.check.ncols()).copy_from(&self.check);
        m
    }

    /// Coordinates of a sampled function (inner products with the basis).
    pub fn coordinates(&self, f: &CircleFunction) -> CVector {
        let v = CVector::from_column_slice(f.samples());
        (self.combined().adjoint() * v).unscale(f.len() as f64)
    }
}

/// Sampled bases `{θ z^j}` and `{z^{-k}}` on the window's grid.
pub fn window_bases(theta: &BlaschkeProduct, window: &LaurentWindow) -> Result<SectionBases> {
    let n = window.grid_size;
    if crate::circle::adequate_grid(theta.max_modulus(), n) > n {
        return Err(Error::WindowTooSmall(format!("grid {n} does not resolve the inner function")));
    }
    let pts = grid_points(n);
    let hat = CMatrix::from_fn(n, window.hat_len(), |r, j| theta.eval_unchecked(pts[r]) * pts[r].powi(j as i32));
    let check = CMatrix::from_fn(n, window.check_len(), |r, k| pts[r].powi(-(k as i32) - 1));
    Ok(SectionBases { hat, check })
}

/// An operator `K_θ^⊥ → K_α^⊥` on a window, stored as one square matrix in
/// the `[hat; check]` layout.
#[derive(Clone, Debug)]
pub struct DualBlockOperator {
    pub matrix: CMatrix,
    pub window: LaurentWindow,
    pub theta: BlaschkeProduct,
    pub alpha: BlaschkeProduct,
}

impl DualBlockOperator {
    pub fn t_hat(&self) -> CMatrix {
        let k = self.window.hat_len();
        self.matrix.view((0, 0), (k, k)).into_owned()
    }

    pub fn gamma_check(&self) -> CMatrix {
        let (k, l) = (self.window.hat_len(), self.window.check_len());
        self.matrix.view((0, k), (k, l)).into_owned()
    }

    pub fn gamma_hat(&self) -> CMatrix {
        let (k, l) = (self.window.hat_len(), self.window.check_len());
        self.matrix.view((k, 0), (l, k)).into_owned()
    }

    pub fn t_check(&self) -> CMatrix {
        let (k, l) = (self.window.hat_len(), self.window.check_len());
        self.matrix.view((k, k), (l, l)).into_owned()
    }

    /// Frobenius norms of the four blocks restricted to interior columns,
    /// in the order `T̂, Γ̌, Γ̂, Ť`.
    pub fn interior_block_norms(&self) -> [f64; 4] {
        let k = self.window.hat_len();
        let mut out = [0.0f64; 4];
        for p in self.window.interior() {
            for (r, v) in self.matrix.column(p).iter().enumerate() {
                let slot = match (r < k, p < k) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                out[slot] += v.norm_sqr();
            }
        }
        out.map(f64::sqrt)
    }

    pub fn sub(&self, other: &DualBlockOperator) -> DualBlockOperator {
        DualBlockOperator {
            matrix: &self.matrix - &other.matrix,
            ..self.clone()
        }
    }
}

/// Effective `(neg, pos)` band of a symbol, `(0, 0)` if absent.
fn band(f: Option<&CircleFunction>) -> (usize, usize) {
    f.map_or((0, 0), |g| g.effective_band(BAND_TOL))
}

/// The block-coefficient symbols `(ψ₁θᾱ, ψ₂ᾱ, ψ₃θ, ψ₄)`.
struct BlockSymbols {
    s: [Option<CircleFunction>; 4],
}

impl BlockSymbols {
    fn new(psi: [Option<&CircleFunction>; 4], theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<Self> {
        let n = psi.iter().flatten().map(|f| f.len()).next();
        let Some(n) = n else {
            return Ok(Self { s: [None, None, None, None] });
        };
        if let Some(f) = psi.iter().flatten().find(|f| f.len() != n) {
            return Err(Error::GridMismatch { left: n, right: f.len() });
        }
        let th = CircleFunction::from_blaschke(n, theta);
        let ab = CircleFunction::from_blaschke(n, alpha).conj();
        let s = [
            psi[0].map(|f| &(f * &th) * &ab),
            psi[1].map(|f| f * &ab),
            psi[2].map(|f| f * &th),
            psi[3].cloned(),
        ];
        Ok(Self { s })
    }

    /// Guard covering the spread of every block (see module docs).
    fn guard(&self) -> usize {
        let b: Vec<(usize, usize)> = self.s.iter().map(|f| band(f.as_ref())).collect();
        b[0].1.max(b[1].1).max(b[2].0).max(b[3].0) + 2
    }
}

/// Guard needed for `[T̂_{ψ₁}, Γ̌_{ψ₂}; Γ̂_{ψ₃}, Ť_{ψ₄}]`.
pub fn t2_guard(psi: [Option<&CircleFunction>; 4], theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<usize> {
    Ok(BlockSymbols::new(psi, theta, alpha)?.guard())
}

fn assemble(sym: &BlockSymbols, window: &LaurentWindow) -> Result<CMatrix> {
    for f in sym.s.iter().flatten() {
        window.require_grid(f)?;
    }
    let (k, l) = (window.hat_len(), window.check_len());
    let coeff = |f: &Option<CircleFunction>, m: i64| f.as_ref().map_or(czero(), |g| g.coeff(m));
    Ok(CMatrix::from_fn(k + l, k + l, |r, c| match (r < k, c < k) {
        (true, true) => coeff(&sym.s[0], r as i64 - c as i64),
        (true, false) => coeff(&sym.s[1], r as i64 + (c - k) as i64 + 1),
        (false, true) => coeff(&sym.s[2], -((r - k) as i64) - 1 - c as i64),
        (false, false) => coeff(&sym.s[3], (c - k) as i64 - (r - k) as i64),
    }))
}

/// `[T̂_{ψ₁}, Γ̌_{ψ₂}; Γ̂_{ψ₃}, Ť_{ψ₄}]` on `window` (absent symbols are 0).
/// With `window = None` a default window fitted to the symbols' bands is
/// used.
pub fn t2_operator(
    psi: [Option<&CircleFunction>; 4],
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    window: Option<LaurentWindow>,
) -> Result<DualBlockOperator> {
    let sym = BlockSymbols::new(psi, theta, alpha)?;
    let window = match window {
        Some(w) => {
            let g = sym.guard();
            if w.guard < g || 2 * w.guard >= w.hat_len().min(w.check_len()) {
                return Err(Error::WindowTooSmall(format!(
                    "symbols need guard {g}, window ({}, {}) has guard {}",
                    w.lo, w.hi, w.guard
                )));
            }
            w
        }
        None => LaurentWindow::default_with_guard(sym.guard()).fitted(sym.guard()),
    };
    Ok(DualBlockOperator {
        matrix: assemble(&sym, &window)?,
        window,
        theta: theta.clone(),
        alpha: alpha.clone(),
    })
}

/// `D_φ^{θ,α} = P_α^⊥ M_φ |K_θ^⊥` on a window.
pub fn dtto_blocks(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct, window: Option<LaurentWindow>) -> Result<DualBlockOperator> {
    t2_operator([Some(phi), Some(phi), Some(phi), Some(phi)], theta, alpha, window)
}

/// The block-free window needed by `D_φ^{θ,α}` (guard from the symbol).
pub fn dtto_window(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<LaurentWindow> {
    let g = t2_guard([Some(phi), Some(phi), Some(phi), Some(phi)], theta, alpha)?;
    Ok(LaurentWindow::default_with_guard(g).fitted(g))
}

/// `D_z^θ`: shift on the hat section, `conj(θ(0)) θ ⊗ z̄` corner, zero
/// `Γ̂`, truncated shift on the check section.
pub fn dz_block(theta: &BlaschkeProduct, window: &LaurentWindow) -> DualBlockOperator {
    let (k, l) = (window.hat_len(), window.check_len());
    let mut m = CMatrix::zeros(k + l, k + l);
    for j in 0..k - 1 {
        m[(j + 1, j)] = Complex64::new(1.0, 0.0);
    }
    m[(0, k)] = theta.value_at_zero().conj();
    for c in 1..l {
        m[(k + c - 1, k + c)] = Complex64::new(1.0, 0.0);
    }
    DualBlockOperator {
        matrix: m,
        window: *window,
        theta: theta.clone(),
        alpha: theta.clone(),
    }
}

/// `D_z^θ e_p` as a short list of `(row, value)`.
fn dz_column(theta0: Complex64, window: &LaurentWindow, p: usize) -> Vec<(usize, Complex64)> {
    let k = window.hat_len();
    if p < k {
        if p + 1 < k {
            vec![(p + 1, Complex64::new(1.0, 0.0))]
        } else {
            vec![]
        }
    } else if p == k {
        vec![(0, theta0.conj())]
    } else {
        vec![(p - 1, Complex64::new(1.0, 0.0))]
    }
}

/// `D_z^α v`.
fn dz_apply(alpha0: Complex64, window: &LaurentWindow, v: &CVector) -> CVector {
    let (k, l) = (window.hat_len(), window.check_len());
    let mut out = CVector::zeros(k + l);
    for i in 0..k - 1 {
        out[i + 1] = v[i];
    }
    out[0] += alpha0.conj() * v[k];
    for c in 1..l {
        out[k + c - 1] = v[k + c];
    }
    out
}

/// Column `p` of `D D_z^θ − D_z^α D`.
fn commutator_column(d: &DualBlockOperator, p: usize) -> CVector {
    let theta0 = d.theta.value_at_zero();
    let alpha0 = d.alpha.value_at_zero();
    let mut lhs = CVector::zeros(d.matrix.nrows());
    for (q, v) in dz_column(theta0, &d.window, p) {
        lhs.axpy(v, &d.matrix.column(q), Complex64::new(1.0, 0.0));
    }
    lhs - dz_apply(alpha0, &d.window, &d.matrix.column(p).into_owned())
}

/// `max_p ‖(D D_z^θ − D_z^α D) e_p‖` over interior basis vectors.
pub fn kmutant_intertwine_residual(d: &DualBlockOperator) -> f64 {
    d.window
        .interior()
        .into_iter()
        .map(|p| commutator_column(d, p).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowedResidual {
    pub value: f64,
    pub window: LaurentWindow,
}

/// Interior residual of `D_φ D_z^θ − D_z^α D_φ`.
pub fn interior_commutator_residual(
    phi: &CircleFunction,
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    window: Option<LaurentWindow>,
) -> Result<WindowedResidual> {
    let d = dtto_blocks(phi, theta, alpha, window)?;
    Ok(WindowedResidual {
        value: kmutant_intertwine_residual(&d),
        window: d.window,
    })
}

/// Coordinates of `f ∈ K_β^⊥` in the `[β z^j; z^{-k}]` basis.
fn perp_coordinates(f: &CircleFunction, beta: &BlaschkeProduct, window: &LaurentWindow) -> CVector {
    let (k, l) = (window.hat_len(), window.check_len());
    let shifted = &CircleFunction::from_blaschke(f.len(), beta).conj() * f;
    CVector::from_fn(k + l, |r, _| {
        if r < k {
            shifted.coeff(r as i64)
        } else {
            f.coeff(-((r - k) as i64) - 1)
        }
    })
}

/// Interior residual of
/// `D_φ D_z^θ − D_z^α D_φ = α ⊗ C_θ P_θ^⊥(θᾱφk₀^α) − P_α^⊥(φk₀^θ) ⊗ z̄`
/// (the second factor `C_θ θ = z̄`).
pub fn rank2_identity_residual(
    phi: &CircleFunction,
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    window: Option<LaurentWindow>,
) -> Result<WindowedResidual> {
    let d = dtto_blocks(phi, theta, alpha, window)?;
    let w = d.window;
    let n = phi.len();
    let th = CircleFunction::from_blaschke(n, theta);
    let al = CircleFunction::from_blaschke(n, alpha);
    let inner = &(&(&th * &al.conj()) * phi) * &k0(alpha, n);
    let u = (&inner - &inner.p_model(theta)).conjugation(theta);
    let outer = phi * &k0(theta, n);
    let wv = &outer - &outer.p_model(alpha);
    let u_coords = perp_coordinates(&u, theta, &w);
    let w_coords = perp_coordinates(&wv, alpha, &w);
    let check0 = w.check(0);
    let value = w
        .interior()
        .into_iter()
        .map(|p| {
            let mut rhs = -&w_coords * if p == check0 { Complex64::new(1.0, 0.0) } else { czero() };
            rhs[0] += u_coords[p].conj();
            (commutator_column(&d, p) - rhs).norm()
        })
        .fold(0.0, f64::max);
    Ok(WindowedResidual { value, window: w })
}

/// `max |D[s(q), s(p)] − D[q, p]|` over interior `p, q` off the `z̄`
/// coordinate, where `s` is multiplication by `z`.
pub fn shift_invariance_residual(d: &DualBlockOperator) -> f64 {
    let w = &d.window;
    let k = w.hat_len();
    let shift = |p: usize| if p < k { p + 1 } else { p - 1 };
    let idx: Vec<usize> = w.interior().into_iter().filter(|&p| p != w.check(0)).collect();
    let mut worst: f64 = 0.0;
    for &p in &idx {
        let sp = shift(p);
        for &q in &idx {
            let sq = shift(q);
            worst = worst.max((d.matrix[(sq, sp)] - d.matrix[(q, p)]).norm());
        }
    }
    worst
}

/// `‖C_α D_φ e_p − D_{αφ̄θ̄} C_θ e_p‖` over interior `p` whose conjugate
/// image is interior too. `C_β` swaps `β z^j ↔ z^{-(j+1)}` and conjugates
/// coordinates.
pub fn conjugation_identity_residual_dual(
    phi: &CircleFunction,
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    window: Option<LaurentWindow>,
) -> Result<WindowedResidual> {
    let n = phi.len();
    let al = CircleFunction::from_blaschke(n, alpha);
    let th = CircleFunction::from_blaschke(n, theta);
    let twisted = &(&al * &phi.conj()) * &th.conj();
    let g = t2_guard([Some(phi); 4], theta, alpha)?.max(t2_guard([Some(&twisted); 4], theta, alpha)?);
    let w = match window {
        Some(w) => w,
        None => {
            let w = LaurentWindow::default_with_guard(g).fitted(g);
            let m = w.hi.max(-w.lo);
            LaurentWindow { lo: -m, hi: m, guard: g, grid_size: LaurentWindow::grid_for(-m, m) }
        }
    };
    let d = dtto_blocks(phi, theta, alpha, Some(w))?;
    let e = dtto_blocks(&twisted, theta, alpha, Some(w))?;
    let (k, l) = (w.hat_len(), w.check_len());
    let swap = |p: usize| -> Option<usize> {
        if p < k {
            (p < l).then_some(k + p)
        } else {
            (p - k < k).then_some(p - k)
        }
    };
    let interior = w.interior();
    let inside: std::collections::HashSet<usize> = interior.iter().copied().collect();
    let mut worst: f64 = 0.0;
    for &p in &interior {
        let Some(cp) = swap(p) else { continue };
        if !inside.contains(&cp) {
            continue;
        }
        let col = d.matrix.column(p);
        let mut lhs = CVector::zeros(k + l);
        for (r, v) in col.iter().enumerate() {
            if let Some(sr) = swap(r) {
                lhs[sr] = v.conj();
            }
        }
        worst = worst.max((lhs - e.matrix.column(cp)).norm());
    }
    Ok(WindowedResidual { value: worst, window: w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdattoClass {
    Case1,
    Case2,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdattoReport {
    pub class: IdattoClass,
    /// Relative distance of φ from `(α/γ) K_{zγ}`.
    pub case1_residual: Option<f64>,
    /// Relative distance of `φ k₀^θ` from `K_{zθ}`.
    pub case2_residual: Option<f64>,
}

/// Which commuting class of `D_φ D_z^θ = D_z^α D_φ`, if any, φ belongs to.
pub fn idatto_classify(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct, tol: f64) -> Result<IdattoReport> {
    let n = phi.len();
    let z = BlaschkeProduct::monomial(1);
    let origin_zero = alpha.value_at_zero().norm() < ORIGIN_TOL && theta.value_at_zero().norm() < ORIGIN_TOL;
    let case1_residual = if origin_zero {
        let gamma = alpha.gcd(theta);
        let space = MultipliedModelSpace::new(&alpha.divide(&gamma)?, &z.multiply(&gamma), n)?;
        Some(space.residual(phi)?)
    } else {
        None
    };
    let case2_residual = if alpha.same_zeros(theta) {
        let space = MultipliedModelSpace::new(&BlaschkeProduct::unit(), &z.multiply(theta), n)?;
        Some(space.residual(&(phi * &k0(theta, n)))?)
    } else {
        None
    };
    let class = if case1_residual.is_some_and(|r| r < tol) {
        IdattoClass::Case1
    } else if case2_residual.is_some_and(|r| r < tol) {
        IdattoClass::Case2
    } else {
        IdattoClass::None
    };
    Ok(IdattoReport {
        class,
        case1_residual,
        case2_residual,
    })
}

/// Residual of the symbol class of intertwiners between model spaces, kept
/// here for the dual checks that compare both settings.
pub fn analytic_class_residual(phi: &CircleFunction, theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<f64> {
    membership_residual(phi, theta, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KmutantCase {
    /// `θ(0) ≠ 0`
    I,
    /// `θ(0) = 0 ≠ α(0)`
    II,
    /// `θ(0) = α(0) = 0`
    III,
}

impl KmutantCase {
    pub fn of(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Self {
        let t0 = theta.value_at_zero().norm() >= ORIGIN_TOL;
        let a0 = alpha.value_at_zero().norm() >= ORIGIN_TOL;
        match (t0, a0) {
            (true, _) => KmutantCase::I,
            (false, true) => KmutantCase::II,
            (false, false) => KmutantCase::III,
        }
    }
}

/// The free data of each case.
#[derive(Clone, Debug)]
pub enum KmutantInputs {
    I { psi4: CircleFunction },
    II { psi1: CircleFunction },
    /// `ψ₁ = αθ̄h` with `h` analytic, `ψ₃` arbitrary, `ψ₄` analytic.
    III { h: CircleFunction, psi3: CircleFunction, psi4: CircleFunction },
}

impl KmutantInputs {
    pub fn case(&self) -> KmutantCase {
        match self {
            KmutantInputs::I { .. } => KmutantCase::I,
            KmutantInputs::II { .. } => KmutantCase::II,
            KmutantInputs::III { .. } => KmutantCase::III,
        }
    }

    fn grid(&self) -> usize {
        match self {
            KmutantInputs::I { psi4 } => psi4.len(),
            KmutantInputs::II { psi1 } => psi1.len(),
            KmutantInputs::III { h, .. } => h.len(),
        }
    }
}

/// `ψ₁ … ψ₄` of an intertwiner `D D_z^θ = D_z^α D`.
#[derive(Clone, Debug)]
pub struct KmutantSymbols {
    pub psi: [CircleFunction; 4],
}

impl KmutantSymbols {
    pub fn refs(&self) -> [Option<&CircleFunction>; 4] {
        [Some(&self.psi[0]), Some(&self.psi[1]), Some(&self.psi[2]), Some(&self.psi[3])]
    }
}

/// Completes the symbols from the case's free data.
pub fn kmutant_symbols(inputs: &KmutantInputs, theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<KmutantSymbols> {
    let actual = KmutantCase::of(theta, alpha);
    if actual != inputs.case() {
        return Err(Error::CaseMismatch(format!(
            "inputs are for case {:?} but θ(0) = {}, α(0) = {} give case {:?}",
            inputs.case(),
            theta.value_at_zero(),
            alpha.value_at_zero(),
            actual
        )));
    }
    let n = inputs.grid();
    let th = CircleFunction::from_blaschke(n, theta);
    let al = CircleFunction::from_blaschke(n, alpha);
    let t0c = theta.value_at_zero().conj();
    let a0c = alpha.value_at_zero().conj();
    let psi = match inputs {
        KmutantInputs::I { psi4 } => {
            let psi1 = (&(&al * &th.conj()) * psi4).scale(a0c / t0c);
            let psi2 = (&al * &psi4.p_plus()).scale(a0c);
            let psi3 = (&th.conj() * &psi4.p_minus()).scale(Complex64::new(1.0, 0.0) / t0c);
            [psi1, psi2, psi3, psi4.clone()]
        }
        KmutantInputs::II { psi1 } => {
            let inner = &(&al.conj() * &th) * psi1;
            let psi3 = (&th.conj() * &inner.p_minus()).scale(Complex64::new(1.0, 0.0) / a0c);
            [psi1.clone(), CircleFunction::zero(n), psi3, CircleFunction::zero(n)]
        }
        KmutantInputs::III { h, psi3, psi4 } => {
            for (name, f) in [("h", h), ("psi4", psi4)] {
                let leak = f.p_minus().norm();
                if leak > 1e-10 * f.norm().max(1.0) {
                    return Err(Error::InvalidInput(format!("{name} must be analytic (antianalytic part {leak:e})")));
                }
            }
            let psi1 = &(&al * &th.conj()) * h;
            [psi1, CircleFunction::zero(n), psi3.clone(), psi4.clone()]
        }
    };
    Ok(KmutantSymbols { psi })
}

/// The intertwiner determined by the case's free data.
pub fn kmutant_build(
    inputs: &KmutantInputs,
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    window: Option<LaurentWindow>,
) -> Result<(DualBlockOperator, KmutantSymbols)> {
    let symbols = kmutant_symbols(inputs, theta, alpha)?;
    let d = t2_operator(symbols.refs(), theta, alpha, window)?;
    Ok((d, symbols))
}

#[derive(Clone, Debug, Serialize)]
pub struct C18Report {
    pub residuals: [f64; 4],
    pub c: Complex64,
}

impl C18Report {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// The four conditions equivalent to `D D_z^θ = D_z^α D` for
/// `D = [T̂_{φ₁}, Γ̌_{φ₂}; Γ̂_{φ₃}, Ť_{φ₄}]`, with `c` fitted as the mean of
/// the constant terms of conditions three and four.
pub fn c18_conditions(phi: [&CircleFunction; 4], theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<C18Report> {
    let n = phi[0].len();
    if let Some(f) = phi.iter().find(|f| f.len() != n) {
        return Err(Error::GridMismatch { left: n, right: f.len() });
    }
    let th = CircleFunction::from_blaschke(n, theta);
    let ab = CircleFunction::from_blaschke(n, alpha).conj();
    let t0c = theta.value_at_zero().conj();
    let a0c = alpha.value_at_zero().conj();
    let [f1, f2, f3, f4] = phi;
    let th_f3 = (&th * f3).p_minus();
    let abt_f1 = &(&ab * &th) * f1;
    let r1 = (&f4.p_minus() - &th_f3.scale(t0c)).norm();
    let r2 = (&abt_f1.p_minus() - &th_f3.scale(a0c)).norm();
    let ab_f2 = (&ab * f2).p_plus();
    let d3 = &ab_f2 - &abt_f1.p_plus().scale(t0c);
    let d4 = &ab_f2 - &f4.p_plus().scale(a0c);
    let c = (d3.coeff(0) + d4.coeff(0)) * 0.5;
    let cst = CircleFunction::constant(n, c);
    Ok(C18Report {
        residuals: [r1, r2, (&d3 - &cst).norm(), (&d4 - &cst).norm()],
        c,
    })
}

/// Block-wise interior mismatch `‖D − D_φ‖` in the order `T̂, Γ̌, Γ̂, Ť`.
/// Block entries are exact coefficients, so the reference `D_φ` is built on
/// `D`'s window whatever guard φ itself would need.
pub fn symbol_mismatch(d: &DualBlockOperator, phi: &CircleFunction) -> Result<[f64; 4]> {
    let sym = BlockSymbols::new([Some(phi); 4], &d.theta, &d.alpha)?;
    let e = DualBlockOperator {
        matrix: assemble(&sym, &d.window)?,
        ..d.clone()
    };
    Ok(d.sub(&e).interior_block_norms())
}

/// The only candidate symbol of `D`, read off its `Ť` block (`Ť_φ` fixes φ):
/// `ĉ_m(φ) = Ť(0, m)` for `m ≥ 0` and `Ť(−m, 0)` for `m < 0`, over the
/// interior of the check section.
pub fn reconstruct_symbol(d: &DualBlockOperator, n: usize) -> CircleFunction {
    let w = &d.window;
    let reach = w.check_len().saturating_sub(w.guard) as i64;
    let terms: Vec<(i64, Complex64)> = (1 - reach..reach)
        .map(|m| {
            let (r, c) = if m >= 0 { (0, m as usize) } else { ((-m) as usize, 0) };
            (m, d.matrix[(w.check(r), w.check(c))])
        })
        .collect();
    CircleFunction::from_laurent(n, &terms)
}

/// Mismatch between `D` and the dual truncated Toeplitz operator of its
/// reconstructed symbol, block-wise.
pub fn nonsymbol_residual(d: &DualBlockOperator, n: usize) -> Result<[f64; 4]> {
    symbol_mismatch(d, &reconstruct_symbol(d, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const N: usize = 8192;

    fn window(guard: usize) -> LaurentWindow {
        LaurentWindow::new(-64, 96, guard).unwrap()
    }

    fn one() -> CircleFunction {
        CircleFunction::constant(N, c(1.0, 0.0))
    }

    #[test]
    fn window_validation() {
        assert!(LaurentWindow::new(5, 10, 1).is_err());
        assert!(LaurentWindow::new(-10, 10, 5).is_err());
        let w = LaurentWindow::new(-64, 96, 16).unwrap();
        assert_eq!(w.interior().len(), (96 - 16) + (64 - 16));
        let f = LaurentWindow::default_with_guard(100).fitted(100);
        assert!(f.hi >= 300 && f.lo <= -300);
    }

    #[test]
    fn section_bases_are_orthonormal() {
        let theta = BlaschkeProduct::random(3, 4, 0.7);
        let w = window(16);
        let b = window_bases(&theta, &w).unwrap();
        let m = b.combined();
        let g = (m.adjoint() * &m).unscale(w.grid_size as f64);
        assert!(frobenius(&(g - CMatrix::identity(w.dim(), w.dim()))) < 1e-10);
        let z = window_bases(&BlaschkeProduct::monomial(1), &w).unwrap();
        let pts = grid_points(w.grid_size);
        assert!((z.hat[(5, 2)] - pts[5].powi(3)).norm() < 1e-14);
    }

    #[test]
    fn blocks_match_quadrature() {
        let theta = BlaschkeProduct::random(3, 5, 0.6);
        let alpha = BlaschkeProduct::random(2, 6, 0.6);
        let w = LaurentWindow::new(-192, 256, 64).unwrap();
        let phi = CircleFunction::from_laurent(w.grid_size, &[(-2, c(0.5, 0.1)), (0, c(1.0, 0.0)), (3, c(0.0, -0.4))]);
        let d = dtto_blocks(&phi, &theta, &alpha, Some(w)).unwrap();
        let dom = window_bases(&theta, &w).unwrap();
        let cod = window_bases(&alpha, &w).unwrap();
        let n = w.grid_size;
        for p in [0usize, 7, w.check(0), w.check(11)] {
            let col = if p < w.hat_len() { dom.hat.column(p) } else { dom.check.column(p - w.hat_len()) };
            let f = CircleFunction::from_samples(col.iter().copied().collect());
            let image = &phi * &f;
            let proj = &image - &image.p_model(&alpha);
            let coords = cod.coordinates(&proj);
            assert!((coords - d.matrix.column(p)).norm() < 1e-10, "column {p}");
        }
        assert_eq!(n, d.window.grid_size);
    }

    #[test]
    fn identity_symbol() {
        let theta = BlaschkeProduct::random(3, 8, 0.6);
        let d = dtto_blocks(&one(), &theta, &theta, Some(window(8))).unwrap();
        let dim = d.window.dim();
        assert!(frobenius(&(&d.matrix - CMatrix::identity(dim, dim))) < 1e-12);
    }

    #[test]
    fn hankel_blocks_vanish() {
        let theta = BlaschkeProduct::random(2, 9, 0.6);
        let alpha = BlaschkeProduct::random(3, 10, 0.6);
        let al = CircleFunction::from_blaschke(N, &alpha);
        let th = CircleFunction::from_blaschke(N, &theta);
        let h = CircleFunction::from_laurent(N, &[(0, c(1.0, 0.5)), (2, c(-0.3, 0.0))]);
        let d = t2_operator([None, Some(&(&al * &h.conj())), None, None], &theta, &alpha, None).unwrap();
        assert!(frobenius(&d.gamma_check()) < 1e-10);
        let d = t2_operator([None, None, Some(&(&th.conj() * &h)), None], &theta, &alpha, None).unwrap();
        assert!(frobenius(&d.gamma_hat()) < 1e-10);
    }

    #[test]
    fn dz_matches_blocks_of_z() {
        let theta = BlaschkeProduct::mobius(c(0.5, 0.0));
        let w = window(8);
        let dz = dz_block(&theta, &w);
        let z = CircleFunction::monomial(w.grid_size, 1);
        let d = dtto_blocks(&z, &theta, &theta, Some(w)).unwrap();
        for p in w.interior() {
            assert!((dz.matrix.column(p) - d.matrix.column(p)).norm() < 1e-10);
        }
        assert!((dz.matrix[(0, w.check(0))].norm() - 0.5).abs() < 1e-15);
        assert_eq!(frobenius(&dz.gamma_hat()), 0.0);
        let z2 = dz_block(&BlaschkeProduct::monomial(2), &w);
        assert_eq!(frobenius(&z2.gamma_check()), 0.0);
    }

    #[test]
    fn commuting_classes() {
        // case 1: α(0) = θ(0) = 0, φ ∈ (α/γ) K_{zγ}
        let gamma = BlaschkeProduct::from_zeros(&[c(0.0, 0.0), c(0.3, 0.2)]);
        let theta = gamma.multiply(&BlaschkeProduct::mobius(c(-0.4, 0.1)));
        let alpha = gamma.multiply(&BlaschkeProduct::mobius(c(0.2, -0.5)));
        let outer = alpha.divide(&gamma).unwrap();
        let space = MultipliedModelSpace::new(&outer, &BlaschkeProduct::monomial(1).multiply(&gamma), N).unwrap();
        let phi = space.synthesize(&CVector::from_vec(vec![c(1.0, 0.0), c(0.2, 0.3), c(-0.5, 0.1)]));
        assert_eq!(idatto_classify(&phi, &theta, &alpha, 1e-8).unwrap().class, IdattoClass::Case1);
        assert!(interior_commutator_residual(&phi, &theta, &alpha, None).unwrap().value < 1e-8);

        // case 2: α = θ, φ = f / k₀^θ with f ∈ K_{zθ}
        let theta = BlaschkeProduct::from_zeros(&[c(0.5, 0.1), c(-0.3, 0.4)]);
        let zt = BlaschkeProduct::monomial(1).multiply(&theta);
        let basis = crate::modelspace::ModelBasis::new(&zt, N).unwrap();
        let f = basis.synthesize(&CVector::from_vec(vec![c(0.3, 0.0), c(1.0, -0.2), c(0.1, 0.6)]));
        let phi = f.div(&k0(&theta, N));
        assert_eq!(idatto_classify(&phi, &theta, &theta, 1e-8).unwrap().class, IdattoClass::Case2);
        assert!(interior_commutator_residual(&phi, &theta, &theta, None).unwrap().value < 1e-8);

        // generic symbol
        let phi = CircleFunction::from_laurent(N, &[(-2, c(0.3, 0.0)), (1, c(1.0, 0.2)), (4, c(0.0, 0.5))]);
        assert_eq!(idatto_classify(&phi, &theta, &theta, 1e-8).unwrap().class, IdattoClass::None);
        assert!(interior_commutator_residual(&phi, &theta, &theta, None).unwrap().value > 1e-3);
    }

    #[test]
    fn rank_two_identity() {
        let theta = BlaschkeProduct::random(3, 21, 0.6);
        let alpha = BlaschkeProduct::random(2, 22, 0.6);
        let phi = CircleFunction::from_laurent(N, &[(-3, c(0.2, 0.1)), (0, c(1.0, 0.0)), (2, c(-0.4, 0.3))]);
        assert!(rank2_identity_residual(&phi, &theta, &alpha, None).unwrap().value < 1e-8);
        assert!(rank2_identity_residual(&CircleFunction::zero(N), &theta, &alpha, None).unwrap().value == 0.0);
    }

    #[test]
    fn shift_invariance() {
        let theta = BlaschkeProduct::random(2, 1, 0.6);
        let alpha = BlaschkeProduct::random(3, 2, 0.6);
        let phi = CircleFunction::from_laurent(N, &[(-1, c(0.5, 0.0)), (2, c(1.0, 1.0))]);
        let d = dtto_blocks(&phi, &theta, &alpha, None).unwrap();
        assert!(shift_invariance_residual(&d) < 1e-9);
        let dense = DualBlockOperator {
            matrix: CMatrix::from_fn(d.window.dim(), d.window.dim(), |i, j| c(((i * 31 + j * 17) % 13) as f64 / 13.0, 0.0)),
            ..d
        };
        assert!(shift_invariance_residual(&dense) > 1e-3);
    }

    #[test]
    fn kmutant_cases_intertwine() {
        let theta = BlaschkeProduct::from_zeros(&[c(0.4, 0.3), c(-0.5, 0.2)]);
        let alpha = BlaschkeProduct::from_zeros(&[c(0.1, -0.6)]);
        let psi4 = CircleFunction::from_laurent(N, &[(-2, c(0.3, 0.2)), (0, c(1.0, 0.0)), (1, c(0.0, 0.7))]);
        let (d, s) = kmutant_build(&KmutantInputs::I { psi4 }, &theta, &alpha, None).unwrap();
        assert!(kmutant_intertwine_residual(&d) < 1e-8);
        assert!(shift_invariance_residual(&d) < 1e-9);
        let r = c18_conditions([&s.psi[0], &s.psi[1], &s.psi[2], &s.psi[3]], &theta, &alpha).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");

        let theta = BlaschkeProduct::from_zeros(&[c(0.0, 0.0), c(-0.5, 0.2)]);
        let psi1 = CircleFunction::from_laurent(N, &[(-1, c(0.3, 0.0)), (2, c(1.0, 0.0))]);
        let (d, _) = kmutant_build(&KmutantInputs::II { psi1 }, &theta, &alpha, None).unwrap();
        assert!(kmutant_intertwine_residual(&d) < 1e-8);

        let alpha = BlaschkeProduct::from_zeros(&[c(0.0, 0.0)]);
        let inputs = KmutantInputs::III {
            h: CircleFunction::from_laurent(N, &[(0, c(1.0, 0.0)), (1, c(0.5, 0.0))]),
            psi3: CircleFunction::from_laurent(N, &[(-3, c(0.2, 0.0)), (1, c(0.0, 1.0))]),
            psi4: CircleFunction::from_laurent(N, &[(2, c(0.7, 0.0))]),
        };
        let (d, _) = kmutant_build(&inputs, &theta, &alpha, None).unwrap();
        assert!(kmutant_intertwine_residual(&d) < 1e-8);

        let wrong = KmutantInputs::I { psi4: one() };
        assert!(matches!(kmutant_build(&wrong, &theta, &alpha, None), Err(Error::CaseMismatch(_))));
    }

    #[test]
    fn c18_simple_cases() {
        let theta = BlaschkeProduct::from_zeros(&[c(0.4, 0.3), c(-0.5, 0.2)]);
        let alpha = BlaschkeProduct::from_zeros(&[c(0.1, -0.6)]);
        let zero = CircleFunction::zero(N);
        let r = c18_conditions([&zero, &zero, &zero, &zero], &theta, &alpha).unwrap();
        assert_eq!(r.max(), 0.0);
        assert_eq!(r.c, c(0.0, 0.0));
        let th = CircleFunction::from_blaschke(N, &theta);
        let r = c18_conditions([&zero, &zero, &zero, &th], &theta, &alpha).unwrap();
        assert!(r.residuals[0] < 1e-12);
        assert!(r.residuals[3] > 1e-3);
    }

    #[test]
    fn reconstruction_recovers_dtto_symbols() {
        let theta = BlaschkeProduct::from_zeros(&[c(0.4, 0.3)]);
        let alpha = theta.with_constant(c(0.0, 1.0));
        let phi = CircleFunction::from_laurent(N, &[(-2, c(0.2, 0.3)), (0, c(1.0, 0.0)), (3, c(0.0, -0.5))]);
        let d = dtto_blocks(&phi, &theta, &alpha, None).unwrap();
        let m = nonsymbol_residual(&d, N).unwrap();
        assert!(m.iter().all(|v| *v < 1e-10), "{m:?}");

        let th = CircleFunction::from_blaschke(N, &theta);
        let t0c = theta.value_at_zero().conj();
        let g2 = (&th * &th).scale(t0c);
        let d = t2_operator([Some(&th), Some(&g2), None, Some(&th)], &theta, &alpha, None).unwrap();
        assert!(kmutant_intertwine_residual(&d) < 1e-8);
        let m = nonsymbol_residual(&d, N).unwrap();
        assert!(m[1] > 1e-3 && m[0] < 1e-10 && m[3] < 1e-10, "{m:?}");
    }

    #[test]
    fn conjugation_identity() {
        let theta = BlaschkeProduct::random(2, 41, 0.6);
        let alpha = BlaschkeProduct::random(3, 42, 0.6);
        let phi = CircleFunction::from_laurent(N, &[(-2, c(0.2, 0.3)), (0, c(1.0, 0.0)), (1, c(0.0, -0.5))]);
        assert!(conjugation_identity_residual_dual(&phi, &theta, &alpha, None).unwrap().value < 1e-9);
    }
}
