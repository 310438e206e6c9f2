//! The registered checks. Each trial builds a seeded instance, evaluates
//! residuals and judges them against the configured tolerances.

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::instances::{degree, describe_pair, product, rand_c, rand_phase, random_pair, Laurent, Sharing, DUAL_RADII, MODEL_RADIUS};
use super::{Outcome, Residual, Tolerances, Trial};
use crate::blaschke::{BlaschkeProduct, RandomZeros};
use crate::circle::{common_grid, CircleFunction, DEFAULT_GRID};
use crate::dualspace::{
    c18_conditions, conjugation_identity_residual_dual, idatto_classify, interior_commutator_residual, kmutant_intertwine_residual,
    kmutant_symbols, nonsymbol_residual, rank2_identity_residual, shift_invariance_residual, t2_guard, t2_operator, DualBlockOperator,
    IdattoClass, KmutantCase, KmutantInputs, LaurentWindow,
};
use crate::error::{Error, Result};
use crate::intertwine::{
    cancellation_test, commutator_defect, hankel_transform, intersection_subspace, membership_residual, relation_residual, solve_intertwiners,
    solve_sst, solve_star_intertwiners, solve_sts, span_distance, sst_transform, star_transform, symbol_of_intertwiner, Relation,
};
use crate::linalg::{frobenius, CMatrix, CVector};
use crate::matrix::{operator_norm, OperatorMatrix};
use crate::modelspace::{conjugation_matrix, k0, ModelBasis, MultipliedModelSpace};
use crate::operators::{analytic_defect, atto_matrix, coanalytic_toeplitz_restriction, conjugation_identity_residual, dist_to_alpha_hinf, model_bases, HANKEL_SCHEDULE};

pub(super) type TrialFn = fn(&Trial) -> Result<Outcome>;

pub(super) struct CheckSpec {
    pub id: &'static str,
    pub summary: &'static str,
    pub trials: usize,
    pub degrees: (usize, usize),
    pub run: TrialFn,
}

const MODEL: (usize, usize) = (1, 6);
const DUAL: (usize, usize) = (1, 3);

pub(super) static REGISTRY: [CheckSpec; 19] = [
    CheckSpec { id: "lemma-3.1", summary: "αK_θ ∩ θK_α = lcm(α,θ)·K_gcd(α,θ)", trials: 50, degrees: MODEL, run: lemma_3_1 },
    CheckSpec { id: "eq-3.2", summary: "S_αA_φ − A_φS_θ = P_α(φθ)⊗k̃₀^θ − k₀^α⊗P_θ(z̄φ̄)", trials: 100, degrees: MODEL, run: eq_3_2 },
    CheckSpec { id: "lemma-3.3", summary: "the commutator formula cancels iff (φθ − c) ⊥ K_lcm(α,θ)", trials: 100, degrees: MODEL, run: lemma_3_3 },
    CheckSpec { id: "thm-inter", summary: "intertwiners of S_θ, S_α are A_φ with φ ∈ (α/γ)K_γ, dimension deg γ", trials: 100, degrees: (1, 8), run: thm_inter },
    CheckSpec { id: "cor-inter2", summary: "intertwiner symbols when α | θ, θ | α, α = θ", trials: 30, degrees: MODEL, run: cor_inter2 },
    CheckSpec { id: "cor-coprime-zero", summary: "coprime α, θ admit only the zero intertwiner", trials: 20, degrees: MODEL, run: cor_coprime_zero },
    CheckSpec { id: "cor-star", summary: "S_α*A = AS_θ* iff A = A_φ̄ with φ ∈ (θ/γ)K_γ", trials: 30, degrees: MODEL, run: cor_star },
    CheckSpec { id: "cor-hankel-sts", summary: "S_αB = BS_θ* iff B = J^#A_φ^{θ,α#}C_θ", trials: 30, degrees: MODEL, run: cor_hankel_sts },
    CheckSpec { id: "cor-hankel-sst", summary: "S_α*B = BS_θ iff B = C_αJ^#A_φ^{θ,α#}", trials: 30, degrees: MODEL, run: cor_hankel_sst },
    CheckSpec { id: "prop-2.1", summary: "adjoints of analytic-symbol operators and their kernel αH^∞", trials: 40, degrees: MODEL, run: prop_2_1 },
    CheckSpec { id: "lemma-2.4", summary: "A has an analytic symbol iff A − S_αAS_θ* = ψ⊗k₀^θ", trials: 40, degrees: MODEL, run: lemma_2_4 },
    CheckSpec { id: "prop-4.1-contractive", summary: "‖A_φ‖ ≤ ‖φ‖_∞", trials: 200, degrees: MODEL, run: prop_4_1 },
    CheckSpec { id: "thm-4.2-norm", summary: "‖A_φ‖ = dist(φ, αH^∞) for intertwiner symbols", trials: 20, degrees: MODEL, run: thm_4_2 },
    CheckSpec { id: "lemma-5.1", summary: "conjugation identities C_αA_φ = A_{αφ̄θ̄}C_θ, C_αD_φ = D_{αφ̄θ̄}C_θ, and basis invariants", trials: 40, degrees: DUAL, run: lemma_5_1 },
    CheckSpec { id: "thm-5.2-idatto", summary: "D_φ D_z^θ = D_z^α D_φ exactly in the two symbol classes", trials: 120, degrees: DUAL, run: thm_5_2 },
    CheckSpec { id: "cor-5.3-wnios", summary: "D_φ commutes with D_z^θ iff φ ∈ (k₀^θ)^{-1}K_{zθ}", trials: 40, degrees: DUAL, run: cor_5_3 },
    CheckSpec { id: "lemma-6.1", summary: "block vanishing criteria and shift invariance of block operators", trials: 40, degrees: DUAL, run: lemma_6_1 },
    CheckSpec { id: "thm-6.3-kmutant", summary: "block intertwiners of D_z^θ, D_z^α by origin case, against the four-condition system", trials: 120, degrees: DUAL, run: thm_6_3 },
    CheckSpec { id: "remark-6.5-nonsymbol", summary: "example intertwiners per origin case, and intertwiners that are not dual truncated Toeplitz", trials: 40, degrees: DUAL, run: remark_6_5 },
];

pub(super) fn lookup(id: &str) -> Result<&'static CheckSpec> {
    REGISTRY.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownTheorem(id.to_string()))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model_pair(t: &Trial, theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<(ModelBasis, ModelBasis, usize)> {
    let mut b = model_bases(&[theta, alpha], DEFAULT_GRID * t.scale)?;
    let ab = b.pop().expect("two bases");
    let tb = b.pop().expect("two bases");
    let n = tb.grid_size();
    Ok((tb, ab, n))
}

/// A generic symbol: a Laurent polynomial plus Szegő kernels and their
/// conjugates, so that it has infinitely many nonzero coefficients on both
/// sides.
#[derive(Clone, Debug)]
struct Symbol {
    laurent: Laurent,
    kernels: Vec<(Complex64, Complex64, bool)>,
}

impl Symbol {
    fn random<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> Self {
        let laurent = Laurent::random(rng, lo, hi);
        let mut kernels = Vec::new();
        for conj in [false, true] {
            if (conj && lo < 0) || (!conj && hi > 0) {
                let w = Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(0.0..std::f64::consts::TAU));
                kernels.push((w, rand_c(rng), conj));
            }
        }
        Self { laurent, kernels }
    }

    fn analytic<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::random(rng, 0, 3)
    }

    fn sample(&self, n: usize) -> CircleFunction {
        let mut f = self.laurent.sample(n);
        for &(w, coef, conj) in &self.kernels {
            let k = CircleFunction::from_fn(n, |z| coef / (1.0 - w.conj() * z));
            f = &f + &if conj { k.conj() } else { k };
        }
        f
    }

    fn describe(&self) -> serde_json::Value {
        let kernels: Vec<_> = self
            .kernels
            .iter()
            .map(|(w, coef, conj)| json!({ "w": [w.re, w.im], "coef": [coef.re, coef.im], "conjugated": conj }))
            .collect();
        json!({ "laurent": self.laurent.terms(), "szego_kernels": kernels })
    }
}

fn random_coeffs<R: Rng + ?Sized>(rng: &mut R, k: usize) -> CVector {
    CVector::from_fn(k, |_, _| rand_c(rng))
}

fn operator_family(ops: &[OperatorMatrix]) -> String {
    format!("{} operator(s)", ops.len())
}

fn lemma_3_1(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha, expected, label) = match t.index {
        0 => {
            let a = RandomZeros::within(MODEL_RADIUS).annulus(0.2).sample(&mut rng, 1, &[])[0];
            let theta = BlaschkeProduct::from_zeros(&[c(0.0, 0.0), a]);
            (theta, BlaschkeProduct::monomial(2), 1, "z·φ_a against z²")
        }
        1 => {
            let (th, al) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::AlphaDividesTheta);
            let d = al.degree();
            (th, al, d, "α divides θ")
        }
        2 => {
            let (th, al) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Coprime);
            (th, al, 0, "coprime")
        }
        _ => {
            let (th, al) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Random);
            let d = al.gcd(&th).degree();
            (th, al, d, "random")
        }
    };
    let grid = common_grid(&[&theta, &alpha], DEFAULT_GRID * t.scale);
    let inter = intersection_subspace(&theta, &alpha, grid, tol.identity)?;
    let mut instance = describe_pair(&theta, &alpha);
    instance["kind"] = json!(label);
    Ok(Outcome {
        instance,
        residuals: vec![
            Residual::count("intersection dimension", inter.dim(), expected),
            Residual::small("distance to lcm·K_gcd", inter.distance, tol.positive, tol),
        ],
        classification: Some(format!("dim {}", inter.dim())),
    })
}

fn eq_3_2(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Random);
    let sym = Symbol::random(&mut rng, -3, 3);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let cd = commutator_defect(&sym.sample(n), &tb, &ab)?;
    let mut instance = describe_pair(&theta, &alpha);
    instance["phi"] = sym.describe();
    Ok(Outcome {
        instance,
        residuals: vec![Residual::small("commutator formula", cd.residual, t.tol.identity, &t.tol)],
        classification: None,
    })
}

fn lemma_3_3(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let positive = t.index.is_multiple_of(2);
    // a generic symbol cancels trivially when K_lcm is spanned by k₀ alone
    let degrees = if positive { t.degrees } else { (t.degrees.0.max(2), t.degrees.1.max(2)) };
    let (theta, alpha) = random_pair(&mut rng, degrees, (0.0, MODEL_RADIUS), Sharing::Random);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let mut instance = describe_pair(&theta, &alpha);
    let phi = if positive {
        // φθ = c + ηh + z̄ḡ with η = lcm(α, θ)
        let (h, g, c0) = (Laurent::random(&mut rng, 0, 2), Laurent::random(&mut rng, 0, 2), rand_c(&mut rng));
        let eta = CircleFunction::from_blaschke(n, &alpha.lcm(&theta));
        let th = CircleFunction::from_blaschke(n, &theta);
        let zbar = CircleFunction::monomial(n, -1);
        let inner = &(&CircleFunction::constant(n, c0) + &(&eta * &h.sample(n))) + &(&zbar * &g.sample(n).conj());
        instance["phi"] = json!({ "form": "θ̄(c + ηh + z̄ḡ)", "c": [c0.re, c0.im], "h": h.terms(), "g": g.terms() });
        &th.conj() * &inner
    } else {
        let sym = Symbol::random(&mut rng, -3, 3);
        instance["phi"] = sym.describe();
        sym.sample(n)
    };
    let can = cancellation_test(&phi, &theta, &alpha, tol.positive)?;
    let cd = commutator_defect(&phi, &tb, &ab)?;
    let rhs = frobenius(&cd.formula);
    let mut residuals = vec![Residual::small("commutator formula", cd.residual, tol.identity, tol)];
    if positive {
        residuals.push(Residual::small("cancellation residual", can.residual, tol.positive, tol));
        residuals.push(Residual::small("formula norm", rhs, tol.positive, tol));
    } else {
        residuals.push(Residual::large("cancellation residual", can.residual, tol));
        residuals.push(Residual::large("formula norm", rhs, tol));
    }
    Ok(Outcome {
        instance,
        residuals,
        classification: Some(if can.cancels { "cancels" } else { "does not cancel" }.into()),
    })
}

fn thm_inter(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Random);
    let (tb, ab, _) = model_pair(t, &theta, &alpha)?;
    let expected = alpha.gcd(&theta).degree();
    let sols = solve_intertwiners(&tb, &ab, tol.rank);
    let mut recon: f64 = 0.0;
    let mut member: f64 = 0.0;
    for a in &sols {
        let phi = symbol_of_intertwiner(a, &tb, &ab)?;
        recon = recon.max(frobenius(&(atto_matrix(&phi, &tb, &ab)?.entries - &a.entries)));
        member = member.max(membership_residual(&phi, &theta, &alpha)?);
    }
    Ok(Outcome {
        instance: describe_pair(&theta, &alpha),
        residuals: vec![
            Residual::count("solution dimension", sols.len(), expected),
            Residual::small("symbol round trip", recon, tol.positive, tol),
            Residual::small("symbol class membership", member, tol.positive, tol),
        ],
        classification: Some(operator_family(&sols)),
    })
}

fn cor_inter2(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha, label) = match t.index % 3 {
        0 => {
            let (th, al) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::AlphaDividesTheta);
            (th, al, "α divides θ")
        }
        1 => {
            let (th, al) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::ThetaDividesAlpha);
            (th, al, "θ divides α")
        }
        _ => {
            let d = degree(&mut rng, t.degrees);
            let zeros = RandomZeros::within(MODEL_RADIUS).separated(0.05).sample(&mut rng, d, &[]);
            let th = product(&mut rng, &zeros);
            let al = th.with_constant(rand_phase(&mut rng));
            (th, al, "α = θ")
        }
    };
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    // K_α, (α/θ)K_θ and K_θ respectively
    let space = match t.index % 3 {
        0 => MultipliedModelSpace::new(&BlaschkeProduct::unit(), &alpha, n)?,
        1 => MultipliedModelSpace::new(&alpha.divide(&theta)?, &theta, n)?,
        _ => MultipliedModelSpace::new(&BlaschkeProduct::unit(), &theta, n)?,
    };
    let sols = solve_intertwiners(&tb, &ab, tol.rank);
    let mut member: f64 = 0.0;
    for a in &sols {
        member = member.max(space.residual(&symbol_of_intertwiner(a, &tb, &ab)?)?);
    }
    let mut instance = describe_pair(&theta, &alpha);
    instance["kind"] = json!(label);
    Ok(Outcome {
        instance,
        residuals: vec![
            Residual::count("solution dimension", sols.len(), space.dim()),
            Residual::small("symbol space membership", member, tol.positive, tol),
        ],
        classification: Some(operator_family(&sols)),
    })
}

fn cor_coprime_zero(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Coprime);
    let (tb, ab, _) = model_pair(t, &theta, &alpha)?;
    let sols = solve_intertwiners(&tb, &ab, t.tol.rank);
    Ok(Outcome {
        instance: describe_pair(&theta, &alpha),
        residuals: vec![Residual::count("solution dimension", sols.len(), 0)],
        classification: Some(operator_family(&sols)),
    })
}

/// Basis functions of `(α/γ) K_γ`, γ = gcd(α, θ).
fn symbol_space(theta: &BlaschkeProduct, alpha: &BlaschkeProduct, n: usize) -> Result<MultipliedModelSpace> {
    let gamma = alpha.gcd(theta);
    MultipliedModelSpace::new(&alpha.divide(&gamma)?, &gamma, n)
}

fn cor_star(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Shared);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let stars = solve_star_intertwiners(&tb, &ab, tol.rank);
    // adjoints of intertwiners K_α → K_θ, so the symbols live in (θ/γ)K_γ
    let space = symbol_space(&alpha, &theta, n)?;
    let from_symbols = (0..space.dim())
        .map(|k| atto_matrix(&space.function(k).conj(), &tb, &ab))
        .collect::<Result<Vec<_>>>()?;
    let transformed = solve_intertwiners(&tb, &ab, tol.rank)
        .iter()
        .map(|a| star_transform(a, &tb, &ab))
        .collect::<Result<Vec<_>>>()?;
    let relation = from_symbols
        .iter()
        .map(|a| relation_residual(a, &tb, &ab, Relation::Star) / a.norm().max(1e-300))
        .fold(0.0, f64::max);
    Ok(Outcome {
        instance: describe_pair(&theta, &alpha),
        residuals: vec![
            Residual::count("solution dimension", stars.len(), space.dim()),
            Residual::small("conjugate-symbol operators satisfy the relation", relation, tol.positive, tol),
            Residual::small("span of conjugate-symbol operators", span_distance(&from_symbols, &stars), tol.positive, tol),
            Residual::small("span of C_α A C_θ images", span_distance(&transformed, &stars), tol.positive, tol),
        ],
        classification: Some(operator_family(&stars)),
    })
}

fn hankel_variant(t: &Trial, sst: bool) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    // θ and α^# share a factor
    let (theta, beta) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Shared);
    let alpha = beta.jsharp();
    let mut b = model_bases(&[&theta, &beta, &alpha], DEFAULT_GRID * t.scale)?;
    let ab = b.pop().expect("three bases");
    let asb = b.pop().expect("three bases");
    let tb = b.pop().expect("three bases");
    let n = tb.grid_size();
    let space = symbol_space(&theta, &beta, n)?;
    let solved = if sst { solve_sst(&tb, &ab, tol.rank) } else { solve_sts(&tb, &ab, tol.rank) };
    let built = (0..space.dim())
        .map(|k| {
            let a = atto_matrix(&space.function(k), &tb, &asb)?;
            if sst {
                sst_transform(&a, &tb, &asb, &ab)
            } else {
                hankel_transform(&a, &tb, &asb, &ab)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        instance: describe_pair(&theta, &alpha),
        residuals: vec![
            Residual::count("solution dimension", solved.len(), space.dim()),
            Residual::small("span of transformed symbol operators", span_distance(&built, &solved), tol.positive, tol),
        ],
        classification: Some(operator_family(&solved)),
    })
}

fn cor_hankel_sts(t: &Trial) -> Result<Outcome> {
    hankel_variant(t, false)
}

fn cor_hankel_sst(t: &Trial) -> Result<Outcome> {
    hankel_variant(t, true)
}

fn prop_2_1(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::AlphaDividesTheta);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let sym = Symbol::analytic(&mut rng);
    let h = Laurent::random(&mut rng, 0, 3);
    let phi = sym.sample(n);
    let a = atto_matrix(&phi, &tb, &ab)?;
    let adj = a.adjoint();
    let swapped = atto_matrix(&phi.conj(), &ab, &tb)?;
    let (toeplitz, leak) = coanalytic_toeplitz_restriction(&phi, &ab, &tb)?;
    let hs = h.sample(n);
    let in_kernel = atto_matrix(&(&CircleFunction::from_blaschke(n, &alpha) * &hs), &tb, &ab)?;
    let outside = atto_matrix(&hs, &tb, &ab)?;
    let mut instance = describe_pair(&theta, &alpha);
    instance["phi"] = sym.describe();
    instance["h"] = json!(h.terms());
    Ok(Outcome {
        instance,
        residuals: vec![
            Residual::small("adjoint equals conjugate symbol", frobenius(&(&adj.entries - &swapped.entries)), tol.quadrature, tol),
            Residual::small("T_φ̄ leaves K_α inside K_θ", leak, tol.identity, tol),
            Residual::small("adjoint equals T_φ̄ restriction", frobenius(&(&adj.entries - &toeplitz.entries)), tol.identity, tol),
            Residual::small("‖A_{αh}‖", operator_norm(&in_kernel), tol.identity, tol),
            Residual::large("‖A_h‖", operator_norm(&outside), tol),
        ],
        classification: None,
    })
}

fn lemma_2_4(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let positive = t.index.is_multiple_of(2);
    let degrees = if positive { t.degrees } else { (t.degrees.0.max(2), t.degrees.1.max(2)) };
    let (theta, alpha) = random_pair(&mut rng, degrees, (0.0, MODEL_RADIUS), Sharing::Random);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let mut instance = describe_pair(&theta, &alpha);
    let a = if positive {
        let sym = Symbol::analytic(&mut rng);
        instance["phi"] = sym.describe();
        atto_matrix(&sym.sample(n), &tb, &ab)?
    } else {
        instance["operator"] = json!("random dense matrix");
        OperatorMatrix::new(CMatrix::from_fn(ab.dim(), tb.dim(), |_, _| rand_c(&mut rng)), tb.tag(), ab.tag())
    };
    let ad = analytic_defect(&a, &tb, &ab)?;
    instance["defect"] = json!({ "sigma1": ad.sigma1, "sigma2": ad.sigma2, "kernel_misalignment": ad.kernel_misalignment });
    let score = if ad.sigma1 < 1e-12 { 0.0 } else { (ad.sigma2 / ad.sigma1).max(ad.kernel_misalignment) };
    let mut residuals = Vec::new();
    if positive {
        residuals.push(Residual::small("rank-one defect on k₀", score, tol.identity, tol));
        let recon = match &ad.psi {
            Some(psi) => {
                let b = atto_matrix(&ab.synthesize(psi), &tb, &ab)?;
                frobenius(&(&b.entries - &a.entries)) / frobenius(&a.entries).max(1e-300)
            }
            None => 1.0,
        };
        residuals.push(Residual::small("A_ψ reproduces A", recon, tol.positive, tol));
    } else {
        residuals.push(Residual::large("rank-one defect on k₀", score, tol));
    }
    Ok(Outcome {
        instance,
        residuals,
        classification: Some(if ad.is_rank_one_on_k0() { "analytic symbol" } else { "no analytic symbol" }.into()),
    })
}

fn prop_4_1(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Random);
    let sym = Symbol::random(&mut rng, -3, 3);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let phi = sym.sample(n);
    let excess = (operator_norm(&atto_matrix(&phi, &tb, &ab)?) - phi.sup_norm()).max(0.0);
    let mut instance = describe_pair(&theta, &alpha);
    instance["phi"] = sym.describe();
    Ok(Outcome {
        instance,
        residuals: vec![Residual::small("‖A_φ‖ − ‖φ‖_∞ excess", excess, t.tol.identity, &t.tol)],
        classification: None,
    })
}

fn thm_4_2(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, MODEL_RADIUS), Sharing::Shared);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let space = symbol_space(&theta, &alpha, n)?;
    let coeffs = random_coeffs(&mut rng, space.dim());
    let phi = space.synthesize(&coeffs);
    let norm = operator_norm(&atto_matrix(&phi, &tb, &ab)?);
    let dist = dist_to_alpha_hinf(&phi, &alpha, &HANKEL_SCHEDULE)?;
    let mut instance = describe_pair(&theta, &alpha);
    instance["symbol_coordinates"] = json!(coeffs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    Ok(Outcome {
        instance,
        residuals: vec![
            Residual::small("|‖A_φ‖ − dist(φ, αH^∞)|", (norm - dist.value).abs(), tol.norm, tol),
            Residual::strict("Hankel size beyond 1024", (dist.size as f64 - 1024.0).max(0.0), 0.5),
        ],
        classification: Some(format!("converged at {}", dist.size)),
    })
}

fn dual_grid(t: &Trial) -> usize {
    8192 * t.scale
}

/// Default (or configured) window fitted to `guard`, doubled on retries.
fn dual_window(t: &Trial, guard: usize) -> LaurentWindow {
    let base = t.window.unwrap_or_else(|| LaurentWindow::default_with_guard(guard));
    let w = base.fitted(guard.max(base.guard)).scaled(t.scale);
    LaurentWindow {
        grid_size: w.grid_size.max(LaurentWindow::grid_for(w.lo, w.hi)),
        ..w
    }
}

fn lemma_5_1(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let (theta, alpha) = random_pair(&mut rng, t.degrees, (0.0, DUAL_RADII.1), Sharing::Random);
    let sym = Symbol::random(&mut rng, -3, 3);
    let (tb, ab, n) = model_pair(t, &theta, &alpha)?;
    let phi = sym.sample(n);
    let model = conjugation_identity_residual(&phi, &tb, &ab)?;
    let dual = conjugation_identity_residual_dual(&sym.sample(dual_grid(t)), &theta, &alpha, None)?;
    let gram = frobenius(&(tb.gram() - CMatrix::identity(tb.dim(), tb.dim())));
    let conj = conjugation_matrix(&tb);
    let id = CMatrix::identity(tb.dim(), tb.dim());
    let involution = frobenius(&(conj.compose(&conj)?.entries - &id));
    let isometry = frobenius(&(conj.entries.adjoint() * &conj.entries - &id));
    let a = atto_matrix(&phi, &tb, &ab)?;
    let swap = frobenius(&(a.adjoint().entries - atto_matrix(&phi.conj(), &ab, &tb)?.entries));
    let mut instance = describe_pair(&theta, &alpha);
    instance["phi"] = sym.describe();
    Ok(Outcome {
        instance,
        residuals: vec![
            Residual::small("model-space conjugation identity", model, tol.identity, tol),
            Residual::small("dual-space conjugation identity", dual.value, tol.identity, tol),
            Residual::small("basis Gram − I", gram, tol.quadrature, tol),
            Residual::small("C_θ² − I", involution, tol.quadrature, tol),
            Residual::small("C_θ isometry", isometry, tol.quadrature, tol),
            Residual::small("(A_φ)* − A_φ̄", swap, tol.quadrature, tol),
        ],
        classification: None,
    })
}

fn with_origin<R: Rng + ?Sized>(rng: &mut R, b: &BlaschkeProduct) -> BlaschkeProduct {
    BlaschkeProduct::monomial(1).multiply(b).with_constant(rand_phase(rng))
}

fn dual_product<R: Rng + ?Sized>(rng: &mut R, degrees: (usize, usize), origin: bool) -> BlaschkeProduct {
    let d = degree(rng, degrees);
    let zeros = RandomZeros::within(DUAL_RADII.1).annulus(DUAL_RADII.0).separated(0.05).sample(rng, d - origin as usize, &[]);
    let b = product(rng, &zeros);
    if origin {
        with_origin(rng, &b)
    } else {
        b
    }
}

fn class_name(c: IdattoClass) -> &'static str {
    match c {
        IdattoClass::Case1 => "case1",
        IdattoClass::Case2 => "case2",
        IdattoClass::None => "none",
    }
}

fn thm_5_2(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let n = dual_grid(t);
    let kind = t.index % 4;
    let (theta, alpha, phi, expected, desc) = match kind {
        0 => {
            let (th, al) = random_pair(&mut rng, t.degrees, DUAL_RADII, Sharing::Random);
            let (th, al) = (with_origin(&mut rng, &th), with_origin(&mut rng, &al));
            let gamma = al.gcd(&th);
            let space = MultipliedModelSpace::new(&al.divide(&gamma)?, &BlaschkeProduct::monomial(1).multiply(&gamma), n)?;
            let coeffs = random_coeffs(&mut rng, space.dim());
            let phi = space.synthesize(&coeffs);
            (th, al, phi, IdattoClass::Case1, json!("(α/γ)K_{zγ} with α(0) = θ(0) = 0"))
        }
        1 => {
            let th = dual_product(&mut rng, t.degrees, false);
            let al = th.with_constant(rand_phase(&mut rng));
            let basis = ModelBasis::new(&BlaschkeProduct::monomial(1).multiply(&th), n)?;
            let f = basis.synthesize(&random_coeffs(&mut rng, basis.dim()));
            let phi = f.div(&k0(&th, n));
            (th, al, phi, IdattoClass::Case2, json!("f / k₀^θ with f ∈ K_{zθ}, α = λθ"))
        }
        _ => {
            let (th, al) = match (kind, (t.index / 4) % 2) {
                (2, _) => random_pair(&mut rng, t.degrees, DUAL_RADII, Sharing::Random),
                (_, 0) => {
                    let th = dual_product(&mut rng, t.degrees, false);
                    let al = th.with_constant(rand_phase(&mut rng));
                    (th, al)
                }
                _ => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, true)),
            };
            let sym = Symbol::random(&mut rng, -3, 3);
            let phi = sym.sample(n);
            (th, al, phi, IdattoClass::None, sym.describe())
        }
    };
    let guard = t2_guard([Some(&phi); 4], &theta, &alpha)?;
    let w = dual_window(t, guard);
    let commutator = interior_commutator_residual(&phi, &theta, &alpha, Some(w))?;
    let rank2 = rank2_identity_residual(&phi, &theta, &alpha, Some(w))?;
    let class = idatto_classify(&phi, &theta, &alpha, tol.positive)?;
    let mut residuals = vec![
        Residual::small("rank-two identity", rank2.value, tol.positive, tol),
        Residual::count("classification mismatch", (class.class != expected) as usize, 0),
    ];
    if expected == IdattoClass::None {
        residuals.extend(escalated_commutator(&phi, &theta, &alpha, w, commutator.value, tol)?);
    } else {
        residuals.push(Residual::small("interior commutator", commutator.value, tol.positive, tol));
    }
    let mut instance = describe_pair(&theta, &alpha);
    instance["phi"] = desc;
    instance["window"] = json!(w);
    Ok(Outcome {
        instance,
        residuals,
        classification: Some(class_name(class.class).into()),
    })
}

/// A nonzero interior residual counts only if doubling the window leaves it
/// within a factor of 10; truncation error would shrink much faster.
fn escalated_commutator(
    phi: &CircleFunction,
    theta: &BlaschkeProduct,
    alpha: &BlaschkeProduct,
    w: LaurentWindow,
    first: f64,
    tol: &Tolerances,
) -> Result<Vec<Residual>> {
    let second = interior_commutator_residual(phi, theta, alpha, Some(w.scaled(2)))?.value;
    Ok(vec![
        Residual::large("interior commutator", second, tol),
        Residual::strict("decrease under window escalation", first / second, 10.0),
    ])
}

fn cor_5_3(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let n = dual_grid(t);
    let positive = t.index.is_multiple_of(2);
    let theta = dual_product(&mut rng, t.degrees, (t.index / 2) % 2 == 1);
    let zt = BlaschkeProduct::monomial(1).multiply(&theta);
    let (phi, desc) = if positive {
        let basis = ModelBasis::new(&zt, n)?;
        let f = basis.synthesize(&random_coeffs(&mut rng, basis.dim()));
        (f.div(&k0(&theta, n)), json!("f / k₀^θ with f ∈ K_{zθ}"))
    } else {
        let sym = Symbol::random(&mut rng, -3, 3);
        (sym.sample(n), sym.describe())
    };
    let member = MultipliedModelSpace::new(&BlaschkeProduct::unit(), &zt, n)?.residual(&(&phi * &k0(&theta, n)))?;
    let guard = t2_guard([Some(&phi); 4], &theta, &theta)?;
    let w = dual_window(t, guard);
    let commutator = interior_commutator_residual(&phi, &theta, &theta, Some(w))?;
    let residuals = if positive {
        vec![
            Residual::small("φk₀^θ ∈ K_{zθ}", member, tol.positive, tol),
            Residual::small("interior commutator", commutator.value, tol.positive, tol),
        ]
    } else {
        let mut r = vec![Residual::large("φk₀^θ ∈ K_{zθ}", member, tol)];
        r.extend(escalated_commutator(&phi, &theta, &theta, w, commutator.value, tol)?);
        r
    };
    Ok(Outcome {
        instance: json!({ "theta": theta, "phi": desc, "window": w }),
        residuals,
        classification: Some(if member < tol.positive { "commutes" } else { "does not commute" }.into()),
    })
}

fn block_operator(t: &Trial, psi: [Option<&CircleFunction>; 4], theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> Result<DualBlockOperator> {
    let guard = t2_guard(psi, theta, alpha)?;
    t2_operator(psi, theta, alpha, Some(dual_window(t, guard)))
}

fn lemma_6_1(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let n = dual_grid(t);
    let (theta, alpha) = random_pair(&mut rng, t.degrees, DUAL_RADII, Sharing::Random);
    let th = CircleFunction::from_blaschke(n, &theta);
    let al = CircleFunction::from_blaschke(n, &alpha);
    let h = Laurent::random(&mut rng, 0, 3).sample(n);
    let m = rng.random_range(1..=3);
    let bump = rand_c(&mut rng);
    let generic: Vec<CircleFunction> = (0..4).map(|_| Symbol::random(&mut rng, -3, 3).sample(n)).collect();

    let g2_zero = &al * &h.conj();
    let g2_nonzero = &g2_zero + &(&al * &CircleFunction::monomial(n, m)).scale(bump);
    let g3_zero = &th.conj() * &h;
    let g3_nonzero = &g3_zero + &(&th.conj() * &CircleFunction::monomial(n, -m)).scale(bump);

    let norm = |psi: [Option<&CircleFunction>; 4], slot: usize| -> Result<f64> { Ok(block_operator(t, psi, &theta, &alpha)?.interior_block_norms()[slot]) };
    let full = block_operator(t, [Some(&generic[0]), Some(&generic[1]), Some(&generic[2]), Some(&generic[3])], &theta, &alpha)?;
    let dim = full.window.dim();
    let u = CVector::from_fn(dim, |_, _| rand_c(&mut rng));
    let v = CVector::from_fn(dim, |_, _| rand_c(&mut rng));
    let perturbed = DualBlockOperator {
        matrix: &full.matrix + &u * v.adjoint(),
        ..full.clone()
    };
    Ok(Outcome {
        instance: describe_pair(&theta, &alpha),
        residuals: vec![
            Residual::large("‖T̂_ψ‖, ψ ≠ 0", norm([Some(&generic[0]), None, None, None], 0)?, tol),
            Residual::small("‖Γ̌_ψ‖, ψ ∈ αH̄²", norm([None, Some(&g2_zero), None, None], 1)?, tol.identity, tol),
            Residual::large("‖Γ̌_ψ‖, ψ ∉ αH̄²", norm([None, Some(&g2_nonzero), None, None], 1)?, tol),
            Residual::small("‖Γ̂_ψ‖, ψ ∈ θ̄H²", norm([None, None, Some(&g3_zero), None], 2)?, tol.identity, tol),
            Residual::large("‖Γ̂_ψ‖, ψ ∉ θ̄H²", norm([None, None, Some(&g3_nonzero), None], 2)?, tol),
            Residual::large("‖Ť_ψ‖, ψ ≠ 0", norm([None, None, None, Some(&generic[3])], 3)?, tol),
            Residual::small("shift invariance of block operator", shift_invariance_residual(&full), tol.identity, tol),
            Residual::large("shift invariance after rank-one perturbation", shift_invariance_residual(&perturbed), tol),
        ],
        classification: None,
    })
}

fn thm_6_3(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let n = dual_grid(t);
    let case = t.index % 3;
    let perturbed = (t.index / 3) % 2 == 1;
    let kind = (t.index / 6) % 3;
    let (theta, alpha) = match case {
        0 => (dual_product(&mut rng, t.degrees, false), dual_product(&mut rng, t.degrees, false)),
        1 => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, false)),
        _ => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, true)),
    };
    let inputs = match case {
        0 => KmutantInputs::I {
            psi4: Symbol::random(&mut rng, -3, 3).sample(n),
        },
        1 => KmutantInputs::II {
            psi1: Symbol::random(&mut rng, -3, 3).sample(n),
        },
        _ => KmutantInputs::III {
            h: Symbol::analytic(&mut rng).sample(n),
            psi3: Symbol::random(&mut rng, -3, 3).sample(n),
            psi4: Symbol::analytic(&mut rng).sample(n),
        },
    };
    let mut symbols = kmutant_symbols(&inputs, &theta, &alpha)?;
    let mut label = format!("case {:?}", KmutantCase::of(&theta, &alpha));
    if perturbed {
        let m = rng.random_range(1..=3);
        let eps = 0.5 * rand_phase(&mut rng);
        let al = CircleFunction::from_blaschke(n, &alpha);
        let th = CircleFunction::from_blaschke(n, &theta);
        let (slot, bump) = match kind {
            0 => (1, (&al * &CircleFunction::monomial(n, m)).scale(eps)),
            1 => (3, CircleFunction::monomial(n, -m).scale(eps)),
            _ => (0, (&(&al * &th.conj()) * &CircleFunction::monomial(n, -m)).scale(eps)),
        };
        symbols.psi[slot] = &symbols.psi[slot] + &bump;
        label.push_str(&format!(", ψ{} perturbed at frequency {}", slot + 1, if kind == 0 { m } else { -m }));
    }
    let d = block_operator(t, symbols.refs(), &theta, &alpha)?;
    let c18 = c18_conditions([&symbols.psi[0], &symbols.psi[1], &symbols.psi[2], &symbols.psi[3]], &theta, &alpha)?;
    let inter = kmutant_intertwine_residual(&d);
    let mut residuals = vec![Residual::small("shift invariance", shift_invariance_residual(&d), tol.identity, tol)];
    if perturbed {
        residuals.push(Residual::large("four-condition system", c18.max(), tol));
        residuals.push(Residual::large("interior intertwining", inter, tol));
    } else {
        residuals.push(Residual::small("four-condition system", c18.max(), tol.identity, tol));
        residuals.push(Residual::small("interior intertwining", inter, tol.positive, tol));
    }
    let mut instance = describe_pair(&theta, &alpha);
    instance["kind"] = json!(label);
    instance["window"] = json!(d.window);
    Ok(Outcome {
        instance,
        residuals,
        classification: Some(if c18.max() < tol.identity { "intertwines" } else { "does not intertwine" }.into()),
    })
}

/// `θ` with `α(0) = θ(0)`: α's zeros are θ's rotated, constant adjusted.
fn matched_origin<R: Rng + ?Sized>(rng: &mut R, theta: &BlaschkeProduct) -> BlaschkeProduct {
    let zeros: Vec<Complex64> = theta.zero_list().iter().map(|a| a * rand_phase(rng)).collect();
    let b = BlaschkeProduct::from_zeros(&zeros);
    b.with_constant(theta.value_at_zero() / b.value_at_zero())
}

fn remark_6_5(t: &Trial) -> Result<Outcome> {
    let mut rng = t.rng();
    let tol = &t.tol;
    let n = dual_grid(t);
    let variant = t.index % 5;
    let one = Complex64::new(1.0, 0.0);
    let zbar = CircleFunction::monomial(n, -1);
    let zero = CircleFunction::zero(n);
    let (theta, alpha) = match variant {
        0 => {
            let th = dual_product(&mut rng, t.degrees, false);
            let al = matched_origin(&mut rng, &th);
            (th, al)
        }
        1 => (dual_product(&mut rng, t.degrees, false), dual_product(&mut rng, t.degrees, true)),
        2 => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, false)),
        3 => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, true)),
        _ if (t.index / 5).is_multiple_of(2) => {
            let th = dual_product(&mut rng, t.degrees, false);
            let al = th.with_constant(rand_phase(&mut rng));
            (th, al)
        }
        _ => (dual_product(&mut rng, t.degrees, true), dual_product(&mut rng, t.degrees, true)),
    };
    let th = CircleFunction::from_blaschke(n, &theta);
    let al = CircleFunction::from_blaschke(n, &alpha);
    let t0 = theta.value_at_zero();
    let a0 = alpha.value_at_zero();
    let (label, ops): (&str, Vec<[CircleFunction; 4]>) = match variant {
        0 => (
            "θ(0) = α(0) ≠ 0",
            vec![
                [al.clone(), (&al * &th).scale(t0.conj()), zero.clone(), th.clone()],
                [&(&zbar * &al) * &th.conj(), zero.clone(), (&zbar * &th.conj()).scale(one / t0.conj()), zbar.clone()],
                [
                    &zbar * &al,
                    (&(&al * &zbar) * &(&th - &CircleFunction::constant(n, t0))).scale(t0.conj()),
                    (&zbar * &th.conj()).scale(t0 / t0.conj()),
                    &zbar * &th,
                ],
            ],
        ),
        1 => (
            "θ(0) ≠ 0 = α(0)",
            vec![
                [zero.clone(), zero.clone(), zero.clone(), th.clone()],
                [zero.clone(), zero.clone(), (&zbar * &th.conj()).scale(one / t0.conj()), zbar.clone()],
                [zero.clone(), zero.clone(), (&zbar * &th.conj()).scale(t0 / t0.conj()), &zbar * &th],
            ],
        ),
        2 => (
            "θ(0) = 0 ≠ α(0)",
            vec![
                [al.clone(), zero.clone(), zero.clone(), zero.clone()],
                [th.conj(), zero.clone(), &th.conj() * &(&al.conj().scale(one / a0.conj()) - &CircleFunction::constant(n, one)), zero.clone()],
                [&zbar * &th.conj(), zero.clone(), (&(&zbar * &al.conj()) * &th.conj()).scale(one / a0.conj()), zero.clone()],
            ],
        ),
        3 => {
            let chi: Vec<CircleFunction> = (0..3).map(|_| Symbol::analytic(&mut rng).sample(n)).collect();
            let w: Vec<Complex64> = (0..3).map(|_| rand_c(&mut rng)).collect();
            let d1 = &(&al * &th.conj()) * &chi[0];
            let d2 = &th.conj() * &chi[1].conj();
            let d3 = chi[2].clone();
            (
                "θ(0) = α(0) = 0",
                vec![
                    [d1.clone(), zero.clone(), zero.clone(), zero.clone()],
                    [zero.clone(), zero.clone(), d2.clone(), zero.clone()],
                    [zero.clone(), zero.clone(), zero.clone(), d3.clone()],
                    [d1.scale(w[0]), zero.clone(), d2.scale(w[1]), d3.scale(w[2])],
                ],
            )
        }
        _ if t0.norm() > 0.0 => ("α = λθ, θ(0) ≠ 0: not a dual truncated Toeplitz operator", vec![[th.clone(), (&th * &th).scale(t0.conj()), zero.clone(), th.clone()]]),
        _ => ("θ(0) = α(0) = 0: not a dual truncated Toeplitz operator", vec![[zero.clone(), zero.clone(), zero.clone(), th.clone()]]),
    };
    let mut residuals = Vec::new();
    for (k, psi) in ops.iter().enumerate() {
        let d = block_operator(t, [Some(&psi[0]), Some(&psi[1]), Some(&psi[2]), Some(&psi[3])], &theta, &alpha)?;
        let c18 = c18_conditions([&psi[0], &psi[1], &psi[2], &psi[3]], &theta, &alpha)?;
        residuals.push(Residual::small(&format!("operator {} intertwining", k + 1), kmutant_intertwine_residual(&d), tol.positive, tol));
        residuals.push(Residual::small(&format!("operator {} four-condition system", k + 1), c18.max(), tol.identity, tol));
        if variant == 4 {
            let mismatch = nonsymbol_residual(&d, n)?.iter().copied().fold(0.0, f64::max);
            residuals.push(Residual::large("single-symbol reconstruction mismatch", mismatch, tol));
            // a genuine dual truncated Toeplitz operator reconstructs exactly
            let control = block_operator(t, [Some(&psi[0]); 4], &theta, &alpha)?;
            let back = nonsymbol_residual(&control, n)?.iter().copied().fold(0.0, f64::max);
            residuals.push(Residual::small("reconstruction of D_ψ₁", back, tol.positive, tol));
        }
    }
    let mut instance = describe_pair(&theta, &alpha);
    instance["kind"] = json!(label);
    Ok(Outcome {
        instance,
        residuals,
        classification: Some(label.split(':').next().unwrap_or(label).to_string()),
    })
}
