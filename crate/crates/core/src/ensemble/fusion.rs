//! Fusion of member posteriors into a single class decision.
//!
//! A combiner is applied once per class column of the N×L score matrix; the
//! class with the highest fused value wins.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agg::{self, settle, UnitVector};
use crate::error::{Error, Result};
use crate::gm::{self, GmCombiner, WeightCalc};

/// Tolerance on posterior row sums.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Fused values within this distance of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Member posteriors: one row per member, one column per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: Vec<Vec<f64>>,
    n_classes: usize,
}

impl ScoreMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_classes = Self::check_shape(&rows)?;
        for (i, row) in rows.iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::MalformedScores(format!(
                    "row {i}: score {v} is not in [0,1]"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::MalformedScores(format!(
                    "row {i} sums to {total}, expected 1"
                )));
            }
        }
        Ok(Self { rows, n_classes })
    }

    /// Rescales every row to sum to one. Rows must be nonnegative with a
    /// positive sum.
    pub fn normalized(mut rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::check_shape(&rows)?;
        for (i, row) in rows.iter_mut().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::MalformedScores(format!(
                    "row {i} has a negative or non-finite score"
                )));
            }
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(Error::MalformedScores(format!("row {i} sums to zero")));
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        Self::new(rows)
    }

    fn check_shape(rows: &[Vec<f64>]) -> Result<usize> {
        if rows.len() < 2 {
            return Err(Error::MalformedScores(format!(
                "need at least 2 members, got {}",
                rows.len()
            )));
        }
        let n_classes = rows[0].len();
        if n_classes < 2 {
            return Err(Error::MalformedScores(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n_classes) {
            return Err(Error::MalformedScores(format!(
                "row {i} has {} scores, row 0 has {n_classes}",
                rows[i].len()
            )));
        }
        Ok(n_classes)
    }

    pub fn n_members(&self) -> usize {
        self.rows.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Scores of every member for class `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_vector(&self, j: usize) -> UnitVector {
        UnitVector::from_vec_unchecked(self.column(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    LowestIndex,
    SeededRandom,
}

impl TiePolicy {
    pub fn name(self) -> &'static str {
        match self {
            TiePolicy::LowestIndex => "lowest-index",
            TiePolicy::SeededRandom => "seeded-random",
        }
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lowest-index" => Ok(TiePolicy::LowestIndex),
            "seeded-random" => Ok(TiePolicy::SeededRandom),
            other => Err(Error::Config(format!(
                "unknown tie policy `{other}` (expected lowest-index or seeded-random)"
            ))),
        }
    }
}

/// Index of a maximal entry of `value`. Among entries within [`TIE_TOL`] of
/// the maximum, returns the first one or a uniform draw from `rng`.
pub fn tie_break<R: Rng + ?Sized>(value: &[f64], policy: TiePolicy, rng: &mut R) -> usize {
    debug_assert!(!value.is_empty());
    let top = agg::max_of(value);
    let mut candidates = value
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= top - TIE_TOL)
        .map(|(i, _)| i);
    match policy {
        TiePolicy::LowestIndex => candidates.next().unwrap_or(0),
        TiePolicy::SeededRandom => {
            let all: Vec<usize> = candidates.collect();
            if all.len() == 1 {
                all[0]
            } else {
                all[rng.gen_range(0..all.len())]
            }
        }
    }
}

/// A tie policy bundled with the generator it consumes.
#[derive(Debug, Clone)]
pub struct TieBreaker {
    policy: TiePolicy,
    rng: ChaCha8Rng,
}

impl TieBreaker {
    pub fn new(policy: TiePolicy, seed: u64) -> Self {
        Self {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn lowest_index() -> Self {
        Self::new(TiePolicy::LowestIndex, 0)
    }

    pub fn policy(&self) -> TiePolicy {
        self.policy
    }

    pub fn pick(&mut self, value: &[f64]) -> usize {
        tie_break(value, self.policy, &mut self.rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StaticRule {
    Min,
    Max,
    Arith,
    Prod,
}

impl StaticRule {
    pub fn apply(self, column: &[f64]) -> f64 {
        match self {
            StaticRule::Min => agg::min_of(column),
            StaticRule::Max => agg::max_of(column),
            StaticRule::Arith => settle(agg::mean_of(column)),
            StaticRule::Prod => column.iter().product(),
        }
    }
}

/// Every supported combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combiner {
    Static(StaticRule),
    Vote,
    Gm(GmCombiner),
}

impl Combiner {
    /// Names accepted by [`Combiner::from_str`].
    pub const NAMES: [&'static str; 9] = [
        "min", "max", "arith", "prod", "vote", "h_med", "h_arith", "h_max", "h_min",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Combiner::Static(StaticRule::Min) => "min",
            Combiner::Static(StaticRule::Max) => "max",
            Combiner::Static(StaticRule::Arith) => "arith",
            Combiner::Static(StaticRule::Prod) => "prod",
            Combiner::Vote => "vote",
            Combiner::Gm(c) => c.name(),
        }
    }

    pub fn is_gm(&self) -> bool {
        matches!(self, Combiner::Gm(_))
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "min" => Combiner::Static(StaticRule::Min),
            "max" => Combiner::Static(StaticRule::Max),
            "arith" => Combiner::Static(StaticRule::Arith),
            "prod" => Combiner::Static(StaticRule::Prod),
            "vote" => Combiner::Vote,
            name @ ("h_med" | "h_arith" | "h_max" | "h_min") => {
                Combiner::Gm(gm::make_combiner(name)?)
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown combiner `{s}`; supported combiners: {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_index: usize,
    /// The fused value of every class (vote fractions for majority vote).
    pub fused_scores: Vec<f64>,
    /// For GM combiners, the weight calculation of every class column.
    pub class_weights: Option<Vec<WeightCalc>>,
}

/// Static fusion: `Value_j = F(O_1^j, …, O_N^j)`.
pub fn classify_fusion(
    scores: &ScoreMatrix,
    rule: StaticRule,
    ties: &mut TieBreaker,
) -> Prediction {
    let fused: Vec<f64> = (0..scores.n_classes())
        .map(|j| rule.apply(&scores.column(j)))
        .collect();
    Prediction {
        class_index: ties.pick(&fused),
        fused_scores: fused,
        class_weights: None,
    }
}

/// GM fusion: per class column, dynamic weights `w` from the referential
/// point and `Value_j = Σ_i O_i^j · w_i`.
pub fn classify_gm(
    scores: &ScoreMatrix,
    combiner: &GmCombiner,
    ties: &mut TieBreaker,
) -> Prediction {
    let mut fused = Vec::with_capacity(scores.n_classes());
    let mut calcs = Vec::with_capacity(scores.n_classes());
    for j in 0..scores.n_classes() {
        let column = scores.column_vector(j);
        // N ≥ 2 is a ScoreMatrix invariant.
        let calc = gm::weights_calc_traced(&column, combiner.selector())
            .expect("score matrix has at least two members");
        let value = calc
            .weights
            .as_slice()
            .iter()
            .zip(column.as_slice())
            .map(|(w, o)| w * o)
            .sum();
        fused.push(settle(value));
        calcs.push(calc);
    }
    Prediction {
        class_index: ties.pick(&fused),
        fused_scores: fused,
        class_weights: Some(calcs),
    }
}

/// Plurality vote over each member's own argmax.
pub fn majority_vote(scores: &ScoreMatrix, ties: &mut TieBreaker) -> Prediction {
    let mut votes = vec![0.0; scores.n_classes()];
    for row in scores.rows() {
        votes[ties.pick(row)] += 1.0;
    }
    let n = scores.n_members() as f64;
    votes.iter_mut().for_each(|v| *v /= n);
    Prediction {
        class_index: ties.pick(&votes),
        fused_scores: votes,
        class_weights: None,
    }
}

pub fn fuse(scores: &ScoreMatrix, combiner: &Combiner, ties: &mut TieBreaker) -> Prediction {
    match combiner {
        Combiner::Static(rule) => classify_fusion(scores, *rule, ties),
        Combiner::Vote => majority_vote(scores, ties),
        Combiner::Gm(c) => classify_gm(scores, c, ties),
    }
}
