//! Finite Blaschke products and their divisibility lattice.
//!
//! A product is stored as a canonical zero list plus a unimodular constant:
//!
//! `B(z) = c · ∏ ((a_i − z) / (1 − ā_i z))^{m_i}`.
//!
//! With this factor convention `z` itself is the product with a single zero
//! at the origin and constant `−1`; [`BlaschkeProduct::monomial`] takes care
//! of the sign.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two zeros closer than this are treated as the same zero.
pub const ZERO_MATCH_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub point: Complex64,
    pub mult: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlaschkeJson", into = "BlaschkeJson")]
pub struct BlaschkeProduct {
    zeros: Vec<Zero>,
    constant: Complex64,
}

#[derive(Serialize, Deserialize)]
struct ZeroJson {
    point: [f64; 2],
    mult: usize,
}

#[derive(Serialize, Deserialize)]
struct BlaschkeJson {
    constant: [f64; 2],
    zeros: Vec<ZeroJson>,
}

impl TryFrom<BlaschkeJson> for BlaschkeProduct {
    type Error = Error;
    fn try_from(j: BlaschkeJson) -> Result<Self> {
        BlaschkeProduct::new(
            j.zeros
                .iter()
                .map(|z| (Complex64::new(z.point[0], z.point[1]), z.mult))
                .collect(),
            Complex64::new(j.constant[0], j.constant[1]),
        )
    }
}

impl From<BlaschkeProduct> for BlaschkeJson {
    fn from(b: BlaschkeProduct) -> Self {
        BlaschkeJson {
            constant: [b.constant.re, b.constant.im],
            zeros: b
                .zeros
                .iter()
                .map(|z| ZeroJson {
                    point: [z.point.re, z.point.im],
                    mult: z.mult,
                })
                .collect(),
        }
    }
}

fn canonical_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then_with(|| a.arg().total_cmp(&b.arg()))
}

/// Möbius factor `(a − z)/(1 − ā z)`.
#[inline]
pub fn mobius_factor(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

impl BlaschkeProduct {
    /// Builds a product from `(zero, multiplicity)` pairs. The constant is
    /// normalized to modulus one; coinciding zeros are merged.
    // the negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(zeros: Vec<(Complex64, usize)>, constant: Complex64) -> Result<Self> {
        if !(constant.norm() > 0.0) || !constant.is_finite() {
            return Err(Error::InvalidInput("constant must be nonzero".into()));
        }
        for &(a, m) in &zeros {
            if !(a.norm() < 1.0) {
                return Err(Error::InvalidInput(format!("zero {a} is not inside the unit disk")));
            }
            if m == 0 {
                return Err(Error::InvalidInput(format!("zero {a} has multiplicity 0")));
            }
        }
        Ok(Self::assemble(zeros, constant / constant.norm()))
    }

    fn assemble(zeros: Vec<(Complex64, usize)>, constant: Complex64) -> Self {
        let mut merged: Vec<Zero> = Vec::with_capacity(zeros.len());
        for (a, m) in zeros {
            match merged
                .iter_mut()
                .find(|z| (z.point - a).norm() < ZERO_MATCH_EPS)
            {
                Some(z) => z.mult += m,
                None => merged.push(Zero { point: a, mult: m }),
            }
        }
        merged.sort_by(|x, y| canonical_order(&x.point, &y.point));
        Self {
            zeros: merged,
            constant,
        }
    }

    /// The constant inner function 1 (degree 0, `K = {0}`).
    pub fn unit() -> Self {
        Self {
            zeros: Vec::new(),
            constant: Complex64::new(1.0, 0.0),
        }
    }

    /// Product of Möbius factors with constant 1, one factor per listed zero.
    pub fn from_zeros(zeros: &[Complex64]) -> Self {
        Self::new(
            zeros.iter().map(|&a| (a, 1)).collect(),
            Complex64::new(1.0, 0.0),
        )
        .expect("zeros inside the disk")
    }

    /// `z^n` exactly.
    pub fn monomial(n: usize) -> Self {
        if n == 0 {
            return Self::unit();
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self {
            zeros: vec![Zero {
                point: Complex64::new(0.0, 0.0),
                mult: n,
            }],
            constant: Complex64::new(sign, 0.0),
        }
    }

    /// `φ_a(z) = (a − z)/(1 − ā z)`.
    pub fn mobius(a: Complex64) -> Self {
        Self::from_zeros(&[a])
    }

    pub fn with_constant(&self, constant: Complex64) -> Self {
        Self {
            zeros: self.zeros.clone(),
            constant: constant / constant.norm(),
        }
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.zeros.iter().map(|z| z.mult).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Zeros in canonical order, each repeated by its multiplicity.
    pub fn zero_list(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .flat_map(|z| std::iter::repeat_n(z.point, z.mult))
            .collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.zeros.iter().map(|z| z.point.norm()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        for zero in &self.zeros {
            let a = zero.point;
            if a.norm() > 0.0 && (z - a.conj().inv()).norm() < 1e-14 {
                return Err(Error::PoleHit(z));
            }
        }
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without the pole check, for points in the closed disk.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let mut v = self.constant;
        for zero in &self.zeros {
            v *= mobius_factor(zero.point, z).powi(zero.mult as i32);
        }
        v
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.eval_unchecked(Complex64::new(0.0, 0.0))
    }

    pub fn multiply(&self, other: &BlaschkeProduct) -> BlaschkeProduct {
        let zeros = self
            .zeros
            .iter()
            .chain(&other.zeros)
            .map(|z| (z.point, z.mult))
            .collect();
        Self::assemble(zeros, self.constant * other.constant)
    }

    /// Index of the zero of `self` nearest to `a`, if within tolerance.
    fn matching(&self, a: Complex64) -> Option<usize> {
        self.zeros
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z.point - a).norm()))
            .filter(|&(_, d)| d < ZERO_MATCH_EPS)
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
    }

    pub fn divide(&self, divisor: &BlaschkeProduct) -> Result<BlaschkeProduct> {
        let mut remaining: Vec<Zero> = self.zeros.clone();
        for d in &divisor.zeros {
            let idx = remaining
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z.point - d.point).norm()))
                .filter(|&(_, dist)| dist < ZERO_MATCH_EPS)
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(i, _)| i);
            match idx {
                Some(i) if remaining[i].mult >= d.mult => remaining[i].mult -= d.mult,
                _ => return Err(Error::NotDivisible(d.point)),
            }
        }
        remaining.retain(|z| z.mult > 0);
        Ok(Self {
            zeros: remaining,
            constant: self.constant / divisor.constant,
        })
    }

    /// Greatest common divisor, normalized to constant 1.
    pub fn gcd(&self, other: &BlaschkeProduct) -> BlaschkeProduct {
        let zeros = self
            .zeros
            .iter()
            .filter_map(|z| {
                other
                    .matching(z.point)
                    .map(|j| (z.point, z.mult.min(other.zeros[j].mult)))
            })
            .collect();
        Self::assemble(zeros, Complex64::new(1.0, 0.0))
    }

    /// Least common multiple `B1·B2/gcd`, normalized to constant 1.
    pub fn lcm(&self, other: &BlaschkeProduct) -> BlaschkeProduct {
        let g = self.gcd(other);
        self.multiply(other)
            .divide(&g)
            .expect("gcd divides the product")
            .with_constant(Complex64::new(1.0, 0.0))
    }

    /// `true` iff `self` divides `other`.
    pub fn divides(&self, other: &BlaschkeProduct) -> bool {
        self.gcd(other).same_zeros(self)
    }

    /// Equality up to a unimodular constant.
    pub fn same_zeros(&self, other: &BlaschkeProduct) -> bool {
        self.zeros.len() == other.zeros.len()
            && self.zeros.iter().all(|z| {
                other
                    .matching(z.point)
                    .is_some_and(|j| other.zeros[j].mult == z.mult)
            })
    }

    /// `B^#(z) = conj(B(z̄))`: zeros and constant conjugated.
    pub fn jsharp(&self) -> BlaschkeProduct {
        Self::assemble(
            self.zeros.iter().map(|z| (z.point.conj(), z.mult)).collect(),
            self.constant.conj(),
        )
    }

    /// Random product with `degree` simple zeros drawn uniformly from the
    /// disk of radius `max_radius`.
    pub fn random(degree: usize, seed: u64, max_radius: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(&mut rng, degree, &RandomZeros::within(max_radius))
    }

    pub fn random_with<R: Rng + ?Sized>(rng: &mut R, degree: usize, opts: &RandomZeros) -> Self {
        let zeros = opts.sample(rng, degree, &[]);
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        Self::new(
            zeros.into_iter().map(|a| (a, 1)).collect(),
            Complex64::from_polar(1.0, phase),
        )
        .expect("sampled zeros lie inside the disk")
    }
}

/// Sampling options for random zero sets.
#[derive(Clone, Debug)]
pub struct RandomZeros {
    pub max_radius: f64,
    pub min_radius: f64,
    /// The first zero is placed at the origin.
    pub force_origin: bool,
    /// Minimum distance between any two sampled zeros (and from `avoid`).
    pub min_separation: f64,
}

impl RandomZeros {
    pub fn within(max_radius: f64) -> Self {
        Self {
            max_radius,
            min_radius: 0.0,
            force_origin: false,
            min_separation: 0.0,
        }
    }

    pub fn origin(mut self, force: bool) -> Self {
        self.force_origin = force;
        self
    }

    pub fn separated(mut self, sep: f64) -> Self {
        self.min_separation = sep;
        self
    }

    pub fn annulus(mut self, min_radius: f64) -> Self {
        self.min_radius = min_radius;
        self
    }

    /// Draws `count` points, rejecting candidates closer than the minimum
    /// separation to earlier points or to `avoid`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, avoid: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::with_capacity(count);
        if count > 0 && self.force_origin {
            out.push(Complex64::new(0.0, 0.0));
        }
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            let (lo2, hi2) = (self.min_radius.powi(2), self.max_radius.powi(2));
            let r = (lo2 + (hi2 - lo2) * rng.random::<f64>()).sqrt();
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            let a = Complex64::from_polar(r, t);
            let sep = if attempts > 10_000 { 0.0 } else { self.min_separation };
            let clear = out
                .iter()
                .chain(avoid)
                .all(|b| (a - b).norm() >= sep.max(2.0 * ZERO_MATCH_EPS));
            if clear {
                out.push(a);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z() -> BlaschkeProduct {
        BlaschkeProduct::monomial(1)
    }

    #[test]
    fn monomial_evaluates_to_power() {
        assert!((z().evaluate(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        let z3 = BlaschkeProduct::monomial(3);
        let w = c(0.3, -0.4);
        assert!((z3.evaluate(w).unwrap() - w.powi(3)).norm() < 1e-15);
    }

    #[test]
    fn mobius_value_at_origin() {
        let phi = BlaschkeProduct::mobius(c(0.5, 0.0));
        assert!((phi.evaluate(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unimodular_on_circle() {
        let b = BlaschkeProduct::random(5, 11, 0.9);
        let w = Complex64::from_polar(1.0, std::f64::consts::PI / 7.0);
        assert!((b.evaluate(w).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pole_is_reported() {
        let b = BlaschkeProduct::mobius(c(0.5, 0.0));
        assert!(matches!(b.evaluate(c(2.0, 0.0)), Err(Error::PoleHit(_))));
    }

    #[test]
    fn multiply_merges_zeros() {
        let zz = z().multiply(&z());
        assert_eq!(zz.zeros().len(), 1);
        assert_eq!(zz.zeros()[0].mult, 2);
        assert!(BlaschkeProduct::unit().multiply(&zz).same_zeros(&zz));
        let a = c(0.4, 0.2);
        let zphi = z().multiply(&BlaschkeProduct::mobius(a));
        let expect = BlaschkeProduct::new(vec![(c(0.0, 0.0), 2), (a, 1)], c(1.0, 0.0)).unwrap();
        assert!(zphi.multiply(&z()).same_zeros(&expect));
    }

    #[test]
    fn divide_and_not_divisible() {
        let a = c(0.4, 0.2);
        let phi = BlaschkeProduct::mobius(a);
        let z2phi = BlaschkeProduct::monomial(2).multiply(&phi);
        let q = z2phi.divide(&z()).unwrap();
        assert!(q.same_zeros(&z().multiply(&phi)));
        assert!(phi.divide(&phi).unwrap().is_unit());
        assert!(matches!(
            BlaschkeProduct::monomial(2).divide(&phi),
            Err(Error::NotDivisible(p)) if (p - a).norm() < 1e-15
        ));
    }

    #[test]
    fn gcd_lcm_examples() {
        let a = c(0.5, 0.3);
        let theta = z().multiply(&BlaschkeProduct::mobius(a));
        let alpha = BlaschkeProduct::monomial(2);
        assert!(theta.gcd(&alpha).same_zeros(&z()));
        let expect = BlaschkeProduct::monomial(2).multiply(&BlaschkeProduct::mobius(a));
        assert!(theta.lcm(&alpha).same_zeros(&expect));

        let z2 = BlaschkeProduct::monomial(2);
        let z3 = BlaschkeProduct::monomial(3);
        assert!(z2.gcd(&z3).same_zeros(&z2));
        assert!(z2.lcm(&z3).same_zeros(&z3));

        let g = BlaschkeProduct::mobius(c(0.1, 0.0)).gcd(&BlaschkeProduct::mobius(c(0.2, 0.0)));
        assert!(g.is_unit());
        assert_eq!(theta.gcd(&alpha).constant(), c(1.0, 0.0));
    }

    #[test]
    fn divides_examples() {
        let z2 = BlaschkeProduct::monomial(2);
        assert!(z().divides(&z2));
        assert!(!z2.divides(&z()));
        assert!(BlaschkeProduct::unit().divides(&z2));
    }

    #[test]
    fn random_is_deterministic_and_bounded() {
        let a = BlaschkeProduct::random(3, 7, 0.9);
        assert_eq!(a, BlaschkeProduct::random(3, 7, 0.9));
        let b = BlaschkeProduct::random(4, 9, 0.9);
        assert!(b.zeros().iter().all(|z| z.point.norm() <= 0.9));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = BlaschkeProduct::random_with(&mut rng, 1, &RandomZeros::within(0.9).origin(true));
        assert_eq!(t.degree(), 1);
        let w = c(0.2, 0.1);
        assert!((t.evaluate(w).unwrap().norm() - w.norm()).abs() < 1e-15);
    }

    #[test]
    fn jsharp_conjugates_zeros() {
        let alpha = BlaschkeProduct::mobius(c(0.3, 0.4));
        let s = alpha.jsharp();
        assert!((s.zeros()[0].point - c(0.3, -0.4)).norm() < 1e-15);
        let w = c(0.1, 0.7);
        assert!((s.eval_unchecked(w) - alpha.eval_unchecked(w.conj()).conj()).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let b = BlaschkeProduct::random(3, 5, 0.8);
        let s = serde_json::to_string(&b).unwrap();
        let back: BlaschkeProduct = serde_json::from_str(&s).unwrap();
        assert!(back.same_zeros(&b));
        assert!((back.constant() - b.constant()).norm() < 1e-15);
        let bad = r#"{"constant":[1,0],"zeros":[{"point":[1.5,0],"mult":1}]}"#;
        assert!(serde_json::from_str::<BlaschkeProduct>(bad).is_err());
    }

    fn arb_product() -> impl Strategy<Value = BlaschkeProduct> {
        (1usize..5, any::<u64>()).prop_map(|(d, seed)| BlaschkeProduct::random(d, seed, 0.9))
    }

    proptest! {
        #[test]
        fn lattice_laws(b1 in arb_product(), b2 in arb_product(), shared in arb_product()) {
            let x = b1.multiply(&shared);
            let y = b2.multiply(&shared);
            let g = x.gcd(&y);
            prop_assert!(g.divides(&x) && g.divides(&y));
            prop_assert!(g.same_zeros(&y.gcd(&x)));
            prop_assert!(shared.divides(&g));
            let l = x.lcm(&y);
            prop_assert!(x.divides(&l) && y.divides(&l));
            prop_assert!(x.multiply(&y).same_zeros(&l.multiply(&g)));
        }

        #[test]
        fn divide_undoes_multiply(b1 in arb_product(), b2 in arb_product()) {
            let q = b1.multiply(&b2).divide(&b2).unwrap();
            prop_assert!(q.same_zeros(&b1));
            prop_assert!((q.constant() - b1.constant()).norm() < 1e-12);
        }

        #[test]
        fn evaluation_is_multiplicative(b1 in arb_product(), b2 in arb_product(), r in 0.0f64..1.0, t in 0.0f64..6.3) {
            let w = Complex64::from_polar(r, t);
            let lhs = b1.multiply(&b2).evaluate(w).unwrap();
            let rhs = b1.evaluate(w).unwrap() * b2.evaluate(w).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
