//! Runnable property suite for the aggregation and GM functions.
//!
//! Every property draws its own deterministic stream from the suite seed,
//! so a failing property reports the same first counterexample on every
//! run.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agg::{self, check_directional_monotonicity, DirectionVector, UnitVector, WeightVector};
use crate::gm::{h_theta_slice, GmCombiner, ReferentialSelector, WeightFunctionFamily};
use crate::seed::{derive_rng, hash_str};

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const BOUND_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub input: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub subject: String,
    pub property: &'static str,
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(
                f,
                "PASS {:<8} {} ({} checks)",
                self.subject, self.property, self.checked
            ),
            Some(c) => write!(
                f,
                "FAIL {:<8} {}: x = {:?}: {}",
                self.subject, self.property, c.input, c.detail
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyReport {
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    pub fn find(&self, subject: &str, property: &str) -> Option<&PropertyResult> {
        self.results
            .iter()
            .find(|r| r.subject == subject && r.property == property)
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} properties, {} failed", self.results.len(), failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropsConfig {
    /// Random inputs per property.
    pub samples: usize,
    pub seed: u64,
    pub min_arity: usize,
    pub max_arity: usize,
}

impl PropsConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            min_arity: 2,
            max_arity: 10,
        }
    }
}

pub type Oracle<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// A GM function under test, given by its family of weight functions and
/// optionally a closed form to compare against.
pub struct Subject<'a> {
    pub name: String,
    pub family: &'a dyn WeightFunctionFamily,
    pub oracle: Option<Oracle<'a>>,
}

impl<'a> Subject<'a> {
    pub fn new(name: impl Into<String>, family: &'a dyn WeightFunctionFamily) -> Self {
        Self {
            name: name.into(),
            family,
            oracle: None,
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.family
            .weights(x)
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum()
    }
}

pub const GM_COMBINERS: [GmCombiner; 4] = [
    GmCombiner::new(ReferentialSelector::Median),
    GmCombiner::new(ReferentialSelector::ArithmeticMean),
    GmCombiner::new(ReferentialSelector::Maximum),
    GmCombiner::new(ReferentialSelector::Minimum),
];

/// The four GM combiners, each checked against its closed form.
pub fn gm_subjects() -> Vec<Subject<'static>> {
    GM_COMBINERS
        .iter()
        .map(|c| {
            let selector = c.selector();
            Subject {
                name: c.label().to_string(),
                family: c,
                oracle: Some(Box::new(move |x: &[f64]| h_theta_slice(selector, x))),
            }
        })
        .collect()
}

/// Uniform point in `[0,1]^n`; every fourth draw is snapped to a 0.1 grid
/// so ties and constant tuples show up.
fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let snap = rng.gen_ratio(1, 4);
    (0..n)
        .map(|_| {
            let v: f64 = rng.gen();
            if snap {
                (v * 10.0).round() / 10.0
            } else {
                v
            }
        })
        .collect()
}

struct Runner<'c> {
    config: &'c PropsConfig,
    results: Vec<PropertyResult>,
}

impl Runner<'_> {
    fn rng(&self, subject: &str, property: &str) -> ChaCha8Rng {
        derive_rng(
            self.config.seed,
            "props",
            &[hash_str(subject), hash_str(property)],
        )
    }

    fn arity(&self, i: usize) -> usize {
        let span = self.config.max_arity - self.config.min_arity + 1;
        self.config.min_arity + i % span
    }

    /// Runs `check` on `samples` inputs; it returns a failure detail.
    fn run<F>(&mut self, subject: &str, property: &'static str, mut check: F)
    where
        F: FnMut(&mut ChaCha8Rng, usize) -> Option<(Vec<f64>, String)>,
    {
        let mut rng = self.rng(subject, property);
        let mut counterexample = None;
        let mut checked = 0;
        for i in 0..self.config.samples {
            let n = self.arity(i);
            checked += 1;
            if let Some((input, detail)) = check(&mut rng, n) {
                counterexample = Some(Counterexample { input, detail });
                break;
            }
        }
        self.results.push(PropertyResult {
            subject: subject.to_string(),
            property,
            checked,
            counterexample,
        });
    }

    fn push(
        &mut self,
        subject: &str,
        property: &'static str,
        checked: usize,
        counterexample: Option<Counterexample>,
    ) {
        self.results.push(PropertyResult {
            subject: subject.to_string(),
            property,
            checked,
            counterexample,
        });
    }
}

fn gm_properties(runner: &mut Runner<'_>, s: &Subject<'_>) {
    let name = s.name.as_str();

    runner.run(name, "weight normalization", |rng, n| {
        let x = sample(rng, n);
        let sum: f64 = s.family.weights(&x).iter().sum();
        ((sum - 1.0).abs() > NORMALIZATION_TOL).then(|| (x, format!("weights sum to {sum}")))
    });

    runner.run(name, "averaging bound", |rng, n| {
        let x = sample(rng, n);
        let v = s.value(&x);
        let (lo, hi) = (agg::min_of(&x), agg::max_of(&x));
        (v < lo - BOUND_TOL || v > hi + BOUND_TOL)
            .then(|| (x, format!("value {v} outside [{lo}, {hi}]")))
    });

    runner.run(name, "idempotency", |rng, n| {
        let t: f64 = rng.gen();
        let x = vec![t; n];
        let v = s.value(&x);
        ((v - t).abs() > IDENTITY_TOL).then(|| (x, format!("value {v}, expected {t}")))
    });

    runner.run(name, "homogeneity", |rng, n| {
        let x = sample(rng, n);
        let lambda: f64 = rng.gen_range(0.0..=1.0);
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let (a, b) = (s.value(&scaled), lambda * s.value(&x));
        ((a - b).abs() > IDENTITY_TOL)
            .then(|| (x, format!("H({lambda}·x) = {a}, {lambda}·H(x) = {b}")))
    });

    runner.run(name, "shift invariance", |rng, n| {
        let x = sample(rng, n);
        let (lo, hi) = (agg::min_of(&x), agg::max_of(&x));
        let c: f64 = rng.gen_range(-lo..=1.0 - hi);
        let shifted: Vec<f64> = x.iter().map(|v| (v + c).clamp(0.0, 1.0)).collect();
        let (a, b) = (s.value(&shifted), s.value(&x) + c);
        ((a - b).abs() > IDENTITY_TOL).then(|| (x, format!("H(x + {c}) = {a}, H(x) + {c} = {b}")))
    });

    runner.run(name, "symmetry", |rng, n| {
        let x = sample(rng, n);
        let mut p = x.clone();
        p.shuffle(rng);
        let (a, b) = (s.value(&x), s.value(&p));
        ((a - b).abs() > IDENTITY_TOL)
            .then(|| (x, format!("permutation {p:?} gives {b}, original {a}")))
    });

    runner.run(name, "no zero or one divisors", |rng, n| {
        let x: Vec<f64> = sample(rng, n)
            .into_iter()
            .map(|v| v.clamp(1e-6, 1.0 - 1e-6))
            .collect();
        let v = s.value(&x);
        (v <= 0.0 || v >= 1.0).then(|| (x, format!("interior point maps to {v}")))
    });

    if let Some(oracle) = &s.oracle {
        runner.run(name, "closed form", |rng, n| {
            let x = sample(rng, n);
            let (a, b) = (s.value(&x), oracle(&x));
            ((a - b).abs() > ORACLE_TOL).then(|| (x, format!("two-step {a}, closed form {b}")))
        });
    }

    // Directional monotonicity along (1, …, 1), spread over every arity.
    let property = "(1,…,1)-monotonicity";
    let mut rng = runner.rng(name, property);
    let span = runner.config.max_arity - runner.config.min_arity + 1;
    let mut checked = 0;
    let mut counterexample = None;
    for n in runner.config.min_arity..=runner.config.max_arity {
        let share = runner.config.samples / span
            + usize::from(n - runner.config.min_arity < runner.config.samples % span);
        let r = DirectionVector::diagonal(n).expect("diagonal direction");
        match check_directional_monotonicity(|x| s.value(x), &r, share, &[0.01, 0.1, 0.5], &mut rng)
        {
            agg::MonotonicityOutcome::Pass { pairs_checked } => checked += pairs_checked,
            agg::MonotonicityOutcome::Fail(v) => {
                counterexample = Some(Counterexample {
                    detail: format!(
                        "H(x) = {} > H(x + {}·r) = {} at {:?}",
                        v.value_at_x, v.step, v.value_at_shifted, v.shifted
                    ),
                    input: v.x,
                });
                break;
            }
        }
    }
    runner.push(name, property, checked, counterexample);
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WeightVector {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let rest: f64 = w[..n - 1].iter().sum();
    w[n - 1] = (1.0 - rest).max(0.0);
    WeightVector::new(w).expect("normalized weights")
}

fn unit(x: Vec<f64>) -> UnitVector {
    UnitVector::new(x).expect("sampled point lies in the unit cube")
}

fn owa_properties(runner: &mut Runner<'_>) {
    let name = "OWA";
    let owa = |w: &WeightVector, x: &[f64]| agg::owa(w, &unit(x.to_vec())).expect("matching arity");

    runner.run(name, "averaging bound", |rng, n| {
        let (w, x) = (random_weights(rng, n), sample(rng, n));
        let v = owa(&w, &x);
        (v < agg::min_of(&x) - BOUND_TOL || v > agg::max_of(&x) + BOUND_TOL)
            .then(|| (x, format!("value {v} outside the input range")))
    });

    runner.run(name, "symmetry", |rng, n| {
        let (w, x) = (random_weights(rng, n), sample(rng, n));
        let mut p = x.clone();
        p.shuffle(rng);
        let (a, b) = (owa(&w, &x), owa(&w, &p));
        ((a - b).abs() > IDENTITY_TOL)
            .then(|| (x, format!("permutation {p:?} gives {b}, original {a}")))
    });

    runner.run(name, "shift invariance", |rng, n| {
        let (w, x) = (random_weights(rng, n), sample(rng, n));
        let c: f64 = rng.gen_range(-agg::min_of(&x)..=1.0 - agg::max_of(&x));
        let shifted: Vec<f64> = x.iter().map(|v| (v + c).clamp(0.0, 1.0)).collect();
        let (a, b) = (owa(&w, &shifted), owa(&w, &x) + c);
        ((a - b).abs() > IDENTITY_TOL)
            .then(|| (x, format!("OWA(x + {c}) = {a}, OWA(x) + {c} = {b}")))
    });

    runner.run(name, "idempotency", |rng, n| {
        let w = random_weights(rng, n);
        let t: f64 = rng.gen();
        let x = vec![t; n];
        let v = owa(&w, &x);
        ((v - t).abs() > IDENTITY_TOL).then(|| (x, format!("value {v}, expected {t}")))
    });

    runner.run(name, "boundary", |rng, n| {
        let w = random_weights(rng, n);
        let (zero, one) = (owa(&w, &vec![0.0; n]), owa(&w, &vec![1.0; n]));
        (zero != 0.0 || (one - 1.0).abs() > IDENTITY_TOL).then(|| {
            (
                w.as_slice().to_vec(),
                format!("OWA(0) = {zero}, OWA(1) = {one}"),
            )
        })
    });

    runner.run("Med", "median as OWA", |rng, n| {
        let x = sample(rng, n);
        let mut w = vec![0.0; n];
        if n % 2 == 1 {
            w[n / 2] = 1.0;
        } else {
            w[n / 2 - 1] = 0.5;
            w[n / 2] = 0.5;
        }
        let w = WeightVector::new(w).expect("middle weights");
        let (a, b) = (agg::median(&unit(x.clone())), owa(&w, &x));
        ((a - b).abs() > IDENTITY_TOL).then(|| (x, format!("median {a}, middle-weight OWA {b}")))
    });
}

fn static_properties(runner: &mut Runner<'_>) {
    type Rule = fn(&UnitVector) -> f64;
    let rules: [(&str, Rule); 4] = [
        ("Min", agg::agg_min),
        ("Max", agg::agg_max),
        ("Arith", agg::agg_arith),
        ("Prod", agg::agg_prod),
    ];
    for (name, f) in rules {
        runner.run(name, "boundary", |_, n| {
            let (zero, one) = (f(&unit(vec![0.0; n])), f(&unit(vec![1.0; n])));
            (zero != 0.0 || (one - 1.0).abs() > IDENTITY_TOL)
                .then(|| (vec![0.0; n], format!("F(0) = {zero}, F(1) = {one}")))
        });
        runner.run(name, "monotonicity", |rng, n| {
            let x = sample(rng, n);
            let i = rng.gen_range(0..n);
            let mut y = x.clone();
            y[i] = rng.gen_range(x[i]..=1.0);
            let (a, b) = (f(&unit(x.clone())), f(&unit(y.clone())));
            (a > b + agg::MONOTONICITY_TOL)
                .then(|| (x, format!("raising to {y:?} drops {a} to {b}")))
        });
    }
}

/// Checks the given GM subjects only.
pub fn check_subjects(subjects: &[Subject<'_>], config: &PropsConfig) -> PropertyReport {
    let mut runner = Runner {
        config,
        results: Vec::new(),
    };
    for s in subjects {
        gm_properties(&mut runner, s);
    }
    PropertyReport {
        results: runner.results,
    }
}

/// The full suite: the four GM combiners, OWA and the median, and the
/// static aggregation rules.
pub fn run_suite(config: &PropsConfig) -> PropertyReport {
    let mut report = check_subjects(&gm_subjects(), config);
    let mut runner = Runner {
        config,
        results: Vec::new(),
    };
    owa_properties(&mut runner);
    static_properties(&mut runner);
    report.results.append(&mut runner.results);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Unnormalized;

    impl WeightFunctionFamily for Unnormalized {
        fn weights(&self, x: &[f64]) -> Vec<f64> {
            vec![1.1 / x.len() as f64; x.len()]
        }
    }

    #[test]
    fn suite_passes() {
        let report = run_suite(&PropsConfig::new(2000, 5));
        assert!(report.passed(), "{report}");
        assert!(report.find("H_Med", "closed form").is_some());
        assert_eq!(report.find("H_Arith", "symmetry").unwrap().checked, 2000);
    }

    #[test]
    fn broken_family_is_caught_deterministically() {
        let cfg = PropsConfig::new(500, 9);
        let run = || check_subjects(&[Subject::new("broken", &Unnormalized)], &cfg);
        let report = run();
        let norm = report.find("broken", "weight normalization").unwrap();
        let witness = norm.counterexample.as_ref().unwrap();
        assert!(witness.detail.contains("1.1"));
        assert_eq!(run(), report);
    }

    #[test]
    fn ratio_family_is_not_monotone_everywhere() {
        let report = check_subjects(
            &[Subject::new("ratio", &crate::gm::RatioFamily)],
            &PropsConfig::new(3000, 2),
        );
        assert!(report
            .find("ratio", "weight normalization")
            .unwrap()
            .passed());
        assert!(!report
            .find("ratio", "(1,…,1)-monotonicity")
            .unwrap()
            .passed());
    }
}
