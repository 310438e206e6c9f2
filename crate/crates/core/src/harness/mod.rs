//! Named theorem checks, run as seeded randomized suites with JSON reports.

mod checks;
pub mod instances;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dualspace::LaurentWindow;
use crate::error::{Error, Result};

pub const SCHEMA: &str = "mskit-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub identity: f64,
    pub positive: f64,
    pub negative: f64,
    pub rank: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-10,
            identity: 1e-9,
            positive: 1e-8,
            negative: 1e-3,
            rank: 1e-10,
            norm: 1e-6,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 6] = ["quadrature", "identity", "positive", "negative", "rank", "norm"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {name} must be positive, got {value}")));
        }
        let slot = match name {
            "quadrature" => &mut self.quadrature,
            "identity" => &mut self.identity,
            "positive" => &mut self.positive,
            "negative" => &mut self.negative,
            "rank" => &mut self.rank,
            "norm" => &mut self.norm,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown tolerance `{name}` (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckConfig {
    pub theorem_id: String,
    pub seed: u64,
    pub trials: usize,
    pub degree_range: (usize, usize),
    pub tolerances: Tolerances,
    pub window: Option<LaurentWindow>,
}

impl CheckConfig {
    /// Default configuration of a registered check.
    pub fn new(theorem_id: &str, seed: u64) -> Result<Self> {
        let spec = checks::lookup(theorem_id)?;
        Ok(Self {
            theorem_id: spec.id.to_string(),
            seed,
            trials: spec.trials,
            degree_range: spec.degrees,
            tolerances: Tolerances::default(),
            window: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        checks::lookup(&self.theorem_id)?;
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        let (lo, hi) = self.degree_range;
        if lo < 1 || hi > 12 || lo > hi {
            return Err(Error::InvalidInput(format!("degree range {lo}..{hi} must lie within 1..12")));
        }
        Ok(())
    }
}

/// Registered check ids in suite order.
pub fn registry() -> Vec<&'static str> {
    checks::REGISTRY.iter().map(|c| c.id).collect()
}

pub fn describe(theorem_id: &str) -> Result<&'static str> {
    Ok(checks::lookup(theorem_id)?.summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    /// Passes below `tolerance`, fails at or above `fail_bound`.
    Below,
    /// Passes above `tolerance`, fails at or below `fail_bound`.
    Above,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
    pub expect: Expect,
    pub tolerance: f64,
    pub fail_bound: f64,
    pub verdict: Verdict,
}

impl Residual {
    fn judged(name: &str, value: f64, expect: Expect, tolerance: f64, fail_bound: f64) -> Self {
        let verdict = if !value.is_finite() {
            Verdict::Indeterminate
        } else {
            match expect {
                Expect::Below if value < tolerance => Verdict::Pass,
                Expect::Below if value >= fail_bound => Verdict::Fail,
                Expect::Above if value > tolerance => Verdict::Pass,
                Expect::Above if value <= fail_bound => Verdict::Fail,
                _ => Verdict::Indeterminate,
            }
        };
        Self {
            name: name.to_string(),
            value,
            expect,
            tolerance,
            fail_bound,
            verdict,
        }
    }

    /// Must vanish: pass below `tol`, fail above the negative-class
    /// threshold, indeterminate in between.
    pub fn small(name: &str, value: f64, tol: f64, tols: &Tolerances) -> Self {
        Self::judged(name, value, Expect::Below, tol, tols.negative.max(tol))
    }

    /// Must be clearly nonzero: pass above the negative-class threshold,
    /// fail below the positive-class one.
    pub fn large(name: &str, value: f64, tols: &Tolerances) -> Self {
        Self::judged(name, value, Expect::Above, tols.negative, tols.positive.min(tols.negative))
    }

    /// No gray zone.
    pub fn strict(name: &str, value: f64, tol: f64) -> Self {
        Self::judged(name, value, Expect::Below, tol, tol)
    }

    /// Exact integer agreement.
    pub fn count(name: &str, got: usize, expected: usize) -> Self {
        Self::strict(name, (got as f64 - expected as f64).abs(), 0.5)
    }
}

/// What one trial produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub instance: serde_json::Value,
    pub residuals: Vec<Residual>,
    pub classification: Option<String>,
}

impl Outcome {
    fn verdict(&self) -> Verdict {
        let v: Vec<Verdict> = self.residuals.iter().map(|r| r.verdict).collect();
        if v.contains(&Verdict::Fail) {
            Verdict::Fail
        } else if v.contains(&Verdict::Indeterminate) {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        }
    }
}

/// Per-trial inputs. The instance depends only on `seed`; `scale` enlarges
/// grids and windows on a retry.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub scale: usize,
    pub degrees: (usize, usize),
    pub tol: Tolerances,
    pub window: Option<LaurentWindow>,
}

impl Trial {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub instance: serde_json::Value,
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub retried: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub indeterminate: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub trial_seconds: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub theorem_id: String,
    pub summary_text: &'static str,
    pub config: CheckConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub timing: Timing,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// The report without timing fields; identical across runs with the
    /// same configuration.
    pub fn content_json(&self) -> serde_json::Value {
        let mut v = self.to_json();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        v
    }

    /// Largest value of each named residual across trials.
    pub fn worst_residuals(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for r in self.trials.iter().flat_map(|t| &t.residuals) {
            let e = out.entry(r.name.clone()).or_insert(f64::NEG_INFINITY);
            *e = match r.expect {
                Expect::Below => e.max(r.value),
                Expect::Above if *e == f64::NEG_INFINITY => r.value,
                Expect::Above => e.min(r.value),
            };
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn trial_seed(seed: u64, theorem_id: &str, trial: usize) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a(theorem_id)) ^ trial as u64)
}

fn run_trial(f: checks::TrialFn, config: &CheckConfig, index: usize) -> (TrialRecord, f64) {
    let start = Instant::now();
    let mut trial = Trial {
        index,
        seed: trial_seed(config.seed, &config.theorem_id, index),
        scale: 1,
        degrees: config.degree_range,
        tol: config.tolerances,
        window: config.window,
    };
    let attempt = |t: &Trial| -> (Option<Outcome>, Option<String>, Verdict) {
        match f(t) {
            Ok(o) => {
                let v = o.verdict();
                (Some(o), None, v)
            }
            Err(e) => (None, Some(e.to_string()), Verdict::Indeterminate),
        }
    };
    let (mut outcome, mut error, mut verdict) = attempt(&trial);
    let retried = verdict == Verdict::Indeterminate;
    if retried {
        trial.scale = 2;
        (outcome, error, verdict) = attempt(&trial);
    }
    let outcome = outcome.unwrap_or_default();
    let record = TrialRecord {
        trial: index,
        instance: outcome.instance,
        residuals: outcome.residuals,
        classification: outcome.classification,
        error,
        retried,
        verdict,
    };
    (record, start.elapsed().as_secs_f64())
}

/// Runs one registered check. Trials run in parallel; the report content
/// depends only on the configuration.
pub fn run_check(config: &CheckConfig) -> Result<VerificationReport> {
    config.validate()?;
    let spec = checks::lookup(&config.theorem_id)?;
    let start = Instant::now();
    let results: Vec<(TrialRecord, f64)> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(spec.run, config, i))
        .collect();
    let (trials, trial_seconds): (Vec<TrialRecord>, Vec<f64>) = results.into_iter().unzip();
    let count = |v: Verdict| trials.iter().filter(|t| t.verdict == v).count();
    let summary = Summary {
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        indeterminate: count(Verdict::Indeterminate),
    };
    let verdict = if summary.failed + summary.indeterminate == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        schema: SCHEMA,
        theorem_id: spec.id.to_string(),
        summary_text: spec.summary,
        config: config.clone(),
        trials,
        summary,
        verdict,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            trial_seconds,
        },
    })
}

/// Every registered check with its default configuration.
pub fn run_all(seed: u64) -> Vec<VerificationReport> {
    checks::REGISTRY
        .iter()
        .map(|c| {
            let config = CheckConfig::new(c.id, seed).expect("registered");
            run_check(&config).expect("default configs are valid")
        })
        .collect()
}

#[derive(Serialize)]
pub struct SuiteReport<'a> {
    pub schema: &'static str,
    pub seed: u64,
    pub verdict: Verdict,
    pub reports: &'a [VerificationReport],
}

impl<'a> SuiteReport<'a> {
    pub fn new(seed: u64, reports: &'a [VerificationReport]) -> Self {
        let verdict = if reports.iter().all(|r| r.passed()) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            schema: SCHEMA,
            seed,
            verdict,
            reports,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_judgement() {
        let t = Tolerances::default();
        assert_eq!(Residual::small("a", 1e-12, t.identity, &t).verdict, Verdict::Pass);
        assert_eq!(Residual::small("a", 1e-6, t.identity, &t).verdict, Verdict::Indeterminate);
        assert_eq!(Residual::small("a", 0.1, t.identity, &t).verdict, Verdict::Fail);
        assert_eq!(Residual::large("a", 0.1, &t).verdict, Verdict::Pass);
        assert_eq!(Residual::large("a", 1e-5, &t).verdict, Verdict::Indeterminate);
        assert_eq!(Residual::large("a", 1e-12, &t).verdict, Verdict::Fail);
        assert_eq!(Residual::small("a", f64::NAN, 1.0, &t).verdict, Verdict::Indeterminate);
        assert_eq!(Residual::count("d", 2, 2).verdict, Verdict::Pass);
        assert_eq!(Residual::count("d", 2, 3).verdict, Verdict::Fail);
    }

    #[test]
    fn nan_serializes_as_null() {
        let t = Tolerances::default();
        let v = serde_json::to_value(Residual::small("x", f64::INFINITY, 1.0, &t)).unwrap();
        assert!(v["value"].is_null());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("norm", 1e-5).unwrap();
        assert_eq!(t.norm, 1e-5);
        assert!(t.set("bogus", 1.0).is_err());
        assert!(t.set("norm", -1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(matches!(CheckConfig::new("nope", 0), Err(Error::UnknownTheorem(_))));
        let mut c = CheckConfig::new("thm-inter", 0).unwrap();
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.degree_range = (0, 3);
        assert!(c.validate().is_err());
        c.degree_range = (2, 13);
        assert!(c.validate().is_err());
    }

    #[test]
    fn seeds_differ_per_id_and_trial() {
        let a = trial_seed(1, "thm-inter", 0);
        assert_ne!(a, trial_seed(1, "thm-inter", 1));
        assert_ne!(a, trial_seed(1, "eq-3.2", 0));
        assert_ne!(a, trial_seed(2, "thm-inter", 0));
        assert_eq!(a, trial_seed(1, "thm-inter", 0));
    }

    #[test]
    fn registry_is_complete() {
        assert_eq!(registry().len(), 19);
    }
}
