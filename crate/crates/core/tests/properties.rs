//! Property tests across modules, each against an independently computed
//! reference.

use num_complex::Complex64;
use proptest::prelude::*;

use mskit_core::blaschke::RandomZeros;
use mskit_core::circle::DEFAULT_GRID;
use mskit_core::dualspace::{dtto_blocks, dz_block, LaurentWindow};
use mskit_core::harness::{run_check, trial_seed};
use mskit_core::intertwine::{solve_intertwiners, symbol_of_intertwiner, RANK_TOL};
use mskit_core::linalg::{frobenius, singular_values};
use mskit_core::modelspace::{k0, k0_tilde, reproducing_kernel};
use mskit_core::operators::{atto_matrix, model_bases};
use mskit_core::{BlaschkeProduct, CheckConfig, CircleFunction, ModelBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn product(seed: u64, degree: usize, radius: f64) -> BlaschkeProduct {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = RandomZeros::within(radius).separated(0.05).sample(&mut rng, degree, &[]);
    BlaschkeProduct::from_zeros(&zeros)
}

fn laurent(coeffs: &[(f64, f64)], lo: i64, n: usize) -> CircleFunction {
    let terms: Vec<(i64, Complex64)> = coeffs.iter().enumerate().map(|(i, &(a, b))| (lo + i as i64, c(a, b))).collect();
    CircleFunction::from_laurent(n, &terms)
}

fn bases(theta: &BlaschkeProduct, alpha: &BlaschkeProduct) -> (ModelBasis, ModelBasis) {
    let mut b = model_bases(&[theta, alpha], DEFAULT_GRID).unwrap();
    let ab = b.pop().unwrap();
    (b.pop().unwrap(), ab)
}

fn coeffs(k: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// ⟨e_j, k_w⟩ = e_j(w), with e_j(w) from the closed-form basis and the
    /// inner product by quadrature.
    #[test]
    fn reproducing_property(seed in any::<u64>(), degree in 1usize..6, r in 0.0f64..0.9, t in 0.0f64..6.3) {
        let theta = product(seed, degree, 0.8);
        let b = ModelBasis::new(&theta, DEFAULT_GRID).unwrap();
        let w = Complex64::from_polar(r, t);
        let kw = reproducing_kernel(&theta, w, b.grid_size());
        for j in 0..b.dim() {
            prop_assert!((b.function(j).inner(&kw) - b.eval(j, w)).norm() < 1e-10);
        }
    }

    #[test]
    fn kernel_at_origin_norms(seed in any::<u64>(), degree in 1usize..6) {
        let theta = product(seed, degree, 0.8).with_constant(c(0.6, 0.8));
        let n = DEFAULT_GRID;
        let expected = (1.0 - theta.value_at_zero().norm_sqr()).sqrt();
        prop_assert!((k0(&theta, n).norm() - expected).abs() < 1e-10);
        let kt = k0_tilde(&theta, n);
        prop_assert!((kt.norm() - expected).abs() < 1e-10);
        // k̃₀ lies in K_θ
        prop_assert!((&kt.p_model(&theta) - &kt).norm() < 1e-10);
    }

    #[test]
    fn atto_is_linear_and_ignores_alpha_multiples(
        seed in any::<u64>(), dt in 1usize..5, da in 1usize..5,
        p in coeffs(5), q in coeffs(3), a in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let theta = product(seed, dt, 0.8);
        let alpha = product(seed ^ 0x9e37, da, 0.8);
        let (tb, ab) = bases(&theta, &alpha);
        let n = tb.grid_size();
        let (f, g) = (laurent(&p, -2, n), laurent(&q, -1, n));
        let a = c(a.0, a.1);
        let lhs = atto_matrix(&(&f.scale(a) + &g), &tb, &ab).unwrap().entries;
        let rhs = atto_matrix(&f, &tb, &ab).unwrap().entries * a + atto_matrix(&g, &tb, &ab).unwrap().entries;
        prop_assert!(frobenius(&(lhs - rhs)) < 1e-10);
        // adding α times a polynomial leaves the operator unchanged
        let shifted = &f + &(&CircleFunction::from_blaschke(n, &alpha) * &laurent(&q, 0, n));
        let diff = atto_matrix(&shifted, &tb, &ab).unwrap().entries - atto_matrix(&f, &tb, &ab).unwrap().entries;
        prop_assert!(frobenius(&diff) < 1e-10);
        // contractive
        let norm = singular_values(&atto_matrix(&f, &tb, &ab).unwrap().entries)[0];
        prop_assert!(norm <= f.sup_norm() + 1e-9);
    }

    /// Dimension law and round trip, with gcd degree as the oracle.
    #[test]
    fn intertwiners_match_gcd(seed in any::<u64>(), shared in 0usize..3, dt in 0usize..3, da in 0usize..3) {
        prop_assume!(shared + dt > 0 && shared + da > 0);
        let common = product(seed, shared, 0.8);
        let theta = common.multiply(&product(seed.wrapping_add(1), dt, 0.8));
        let alpha = common.multiply(&product(seed.wrapping_add(2), da, 0.8));
        let (tb, ab) = bases(&theta, &alpha);
        let sols = solve_intertwiners(&tb, &ab, RANK_TOL);
        prop_assert_eq!(sols.len(), alpha.gcd(&theta).degree());
        for a in &sols {
            let phi = symbol_of_intertwiner(a, &tb, &ab).unwrap();
            let back = atto_matrix(&phi, &tb, &ab).unwrap();
            prop_assert!(frobenius(&(&back.entries - &a.entries)) < 1e-8);
        }
    }

    /// Columns of the block matrix against `P_α^⊥(φ f)` computed pointwise:
    /// hat coordinates `ĉ_i(ᾱ g)`, check coordinates `ĉ_{−l−1}(g)`.
    #[test]
    fn blocks_match_pointwise_projection(seed in any::<u64>(), dt in 1usize..3, da in 1usize..3, p in coeffs(5), j in 0usize..6, k in 0usize..6) {
        let theta = product(seed, dt, 0.6);
        let alpha = product(seed ^ 0x51, da, 0.6);
        let n = 8192;
        let phi = laurent(&p, -2, n);
        let d = dtto_blocks(&phi, &theta, &alpha, None).unwrap();
        let w = d.window;
        let th = CircleFunction::from_blaschke(n, &theta);
        let ab = CircleFunction::from_blaschke(n, &alpha).conj();
        for (col, f) in [(w.hat(j), &th * &CircleFunction::monomial(n, j as i64)), (w.check(k), CircleFunction::monomial(n, -(k as i64) - 1))] {
            let g = &phi * &f;
            let ag = &ab * &g;
            for i in 0..w.hat_len() {
                prop_assert!((d.matrix[(w.hat(i), col)] - ag.coeff(i as i64)).norm() < 1e-9);
            }
            for l in 0..w.check_len() {
                prop_assert!((d.matrix[(w.check(l), col)] - g.coeff(-(l as i64) - 1)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn dz_structure(seed in any::<u64>(), degree in 1usize..4) {
        let theta = product(seed, degree, 0.7).with_constant(c(0.0, 1.0));
        let w = LaurentWindow::new(-32, 32, 4).unwrap();
        let d = dz_block(&theta, &w);
        prop_assert_eq!(frobenius(&d.gamma_hat()), 0.0);
        let s = singular_values(&d.gamma_check());
        prop_assert!(s.get(1).copied().unwrap_or(0.0) < 1e-12 * s[0].max(1.0));
    }
}

#[test]
fn reports_are_deterministic() {
    for id in ["thm-inter", "lemma-6.1"] {
        let mut config = CheckConfig::new(id, 99).unwrap();
        config.trials = 6;
        let a = run_check(&config).unwrap();
        let b = run_check(&config).unwrap();
        assert_eq!(a.content_json(), b.content_json());
        config.seed = 100;
        let other = run_check(&config).unwrap();
        assert_ne!(a.content_json()["trials"], other.content_json()["trials"]);
    }
}

#[test]
fn trial_seeds_are_distinct() {
    let mut seen = std::collections::HashSet::new();
    for id in ["thm-inter", "eq-3.2"] {
        for t in 0..500 {
            assert!(seen.insert(trial_seed(7, id, t)));
        }
    }
}

#[test]
fn report_json_shape() {
    let mut config = CheckConfig::new("cor-coprime-zero", 1).unwrap();
    config.trials = 3;
    let v = run_check(&config).unwrap().to_json();
    assert_eq!(v["schema"], "mskit-report/1");
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["trials"].as_array().unwrap().len(), 3);
    assert!(v["timing"]["total_seconds"].is_number());
    assert!(v["trials"][0]["instance"]["theta"]["zeros"].is_array());
}
