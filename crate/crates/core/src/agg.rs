//! Classical aggregation functions over `[0,1]^n`, the OWA operator, order
//! statistics, and a sampled checker for directional monotonicity.

use rand::Rng;

use crate::error::{Error, Result};

/// Slack allowed when validating weight sums.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Results further than this outside `[0,1]` indicate a formula bug.
pub const RANGE_SLACK: f64 = 1e-9;

/// Clamp a scalar that should lie in `[0,1]`, asserting it is at most
/// floating noise away from the interval.
#[inline]
pub(crate) fn settle(v: f64) -> f64 {
    debug_assert!(
        (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v),
        "aggregation result {v} escaped [0,1]"
    );
    v.clamp(0.0, 1.0)
}

/// A non-empty tuple of scores in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Arity("empty input vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::Domain(format!(
                "coordinate {i} = {v} is not in [0,1]"
            )));
        }
        Ok(Self(values))
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Arity("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(0.0..=1.0).contains(*w))
        {
            return Err(Error::Domain(format!("weight {i} = {w} is not in [0,1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Arity("empty weight vector".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub(crate) fn from_vec_unchecked(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Direction `r` for r-monotonicity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVector(Vec<f64>);

impl DirectionVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Arity("empty direction".into()));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("direction has non-finite component".into()));
        }
        if components.iter().all(|&c| c == 0.0) {
            return Err(Error::Domain(
                "direction must have a nonzero component".into(),
            ));
        }
        Ok(Self(components))
    }

    /// The diagonal `(1, …, 1)`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest `k ≥ 0` such that `x + k·r` stays inside `[0,1]^n`.
    pub fn max_step(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&r, &xi)| {
                if r > 0.0 {
                    (1.0 - xi) / r
                } else if r < 0.0 {
                    -xi / r
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

pub(crate) fn min_of(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_of(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn mean_of(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn median_of(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // n = 2k-1 → k-th lowest; n = 2k → mean of k-th and (k+1)-th lowest.
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Decreasing rearrangement `x_(1) ≥ … ≥ x_(n)` (stable).
pub(crate) fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted
}

pub fn agg_min(x: &UnitVector) -> f64 {
    min_of(x.as_slice())
}

pub fn agg_max(x: &UnitVector) -> f64 {
    max_of(x.as_slice())
}

pub fn agg_arith(x: &UnitVector) -> f64 {
    settle(mean_of(x.as_slice()))
}

pub fn agg_prod(x: &UnitVector) -> f64 {
    x.as_slice().iter().product()
}

/// Ordered weighted average: `w_1` multiplies the largest input.
pub fn owa(w: &WeightVector, x: &UnitVector) -> Result<f64> {
    if w.len() != x.len() {
        return Err(Error::Arity(format!(
            "OWA has {} weights but {} inputs",
            w.len(),
            x.len()
        )));
    }
    let value = sorted_desc(x.as_slice())
        .iter()
        .zip(w.as_slice())
        .map(|(xi, wi)| xi * wi)
        .sum();
    Ok(settle(value))
}

pub fn median(x: &UnitVector) -> f64 {
    median_of(x.as_slice())
}

/// A pair `(x, x + k·r)` with `f(x) > f(x + k·r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub x: Vec<f64>,
    pub shifted: Vec<f64>,
    pub step: f64,
    pub value_at_x: f64,
    pub value_at_shifted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityOutcome {
    Pass { pairs_checked: usize },
    Fail(MonotonicityViolation),
}

impl MonotonicityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, MonotonicityOutcome::Pass { .. })
    }
}

/// Decreases smaller than this are treated as floating noise.
pub const MONOTONICITY_TOL: f64 = 1e-12;

/// Checks `f(x) ≤ f(x + k·r)` at the supplied points for every step `k` in
/// `steps` that keeps the shifted point inside the unit cube.
pub fn check_monotone_at<F>(
    f: F,
    r: &DirectionVector,
    points: &[UnitVector],
    steps: &[f64],
) -> Result<MonotonicityOutcome>
where
    F: Fn(&[f64]) -> f64,
{
    let mut checked = 0;
    for x in points {
        if x.len() != r.len() {
            return Err(Error::Arity(format!(
                "point has {} coordinates, direction has {}",
                x.len(),
                r.len()
            )));
        }
        let limit = r.max_step(x.as_slice());
        for &k in steps.iter().filter(|&&k| k >= 0.0 && k <= limit) {
            if let Some(v) = probe(&f, r, x.as_slice(), k) {
                return Ok(MonotonicityOutcome::Fail(v));
            }
            checked += 1;
        }
    }
    Ok(MonotonicityOutcome::Pass {
        pairs_checked: checked,
    })
}

/// Sampled r-monotonicity check over uniform points in `[0,1]^n`.
///
/// Each sample is probed at every admissible step of `step_grid` plus one
/// step drawn uniformly from the admissible range, so short grids still
/// exercise points near the cube boundary.
pub fn check_directional_monotonicity<F, R>(
    f: F,
    r: &DirectionVector,
    samples: usize,
    step_grid: &[f64],
    rng: &mut R,
) -> MonotonicityOutcome
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let n = r.len();
    let mut checked = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let limit = r.max_step(&x);
        let drawn = if limit.is_finite() && limit > 0.0 {
            Some(rng.gen_range(0.0..=limit))
        } else {
            None
        };
        let admissible = step_grid
            .iter()
            .copied()
            .filter(|&k| k >= 0.0 && k <= limit)
            .chain(drawn);
        for k in admissible {
            if let Some(v) = probe(&f, r, &x, k) {
                return MonotonicityOutcome::Fail(v);
            }
            checked += 1;
        }
    }
    MonotonicityOutcome::Pass {
        pairs_checked: checked,
    }
}

fn probe<F>(f: &F, r: &DirectionVector, x: &[f64], k: f64) -> Option<MonotonicityViolation>
where
    F: Fn(&[f64]) -> f64,
{
    let shifted: Vec<f64> = x
        .iter()
        .zip(r.as_slice())
        .map(|(xi, ri)| (xi + k * ri).clamp(0.0, 1.0))
        .collect();
    let before = f(x);
    let after = f(&shifted);
    (before > after + MONOTONICITY_TOL).then(|| MonotonicityViolation {
        x: x.to_vec(),
        shifted,
        step: k,
        value_at_x: before,
        value_at_shifted: after,
    })
}
