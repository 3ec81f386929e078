//! Friedman rank test, Nemenyi post-hoc comparison and win/draw/loss grids.
//!
//! Inputs are keyed by method name; each value lists one score per block
//! (dataset or run). Higher scores are better and receive lower ranks.

use std::collections::BTreeMap;
use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Studentized range quantiles divided by √2 (infinite degrees of freedom),
/// for 2..=20 methods.
const Q_001: [f64; 19] = [
    2.576, 2.913, 3.113, 3.255, 3.364, 3.452, 3.526, 3.590, 3.646, 3.696, 3.741, 3.781, 3.818,
    3.853, 3.884, 3.914, 3.941, 3.967, 3.992,
];
const Q_005: [f64; 19] = [
    1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
];
const Q_010: [f64; 19] = [
    1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
];

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "significance level {alpha} is outside (0,1)"
        )))
    }
}

/// Nemenyi `q_α` for `k` methods. Tabulated for α ∈ {0.01, 0.05, 0.10}.
pub fn nemenyi_q(alpha: f64, k: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let table = if (alpha - 0.01).abs() < 1e-12 {
        &Q_001
    } else if (alpha - 0.05).abs() < 1e-12 {
        &Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_010
    } else {
        return Err(Error::Config(format!(
            "no Nemenyi table for alpha = {alpha} (available: 0.01, 0.05, 0.10)"
        )));
    };
    if !(2..=20).contains(&k) {
        return Err(Error::Config(format!(
            "Nemenyi table covers 2..=20 methods, got {k}"
        )));
    }
    Ok(table[k - 2])
}

/// `CD = q_α √(k(k+1) / 6N)`.
pub fn critical_difference(alpha: f64, k: usize, n_blocks: usize) -> Result<f64> {
    let q = nemenyi_q(alpha, k)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n_blocks as f64)).sqrt())
}

/// Ranks within one block: 1 for the highest score, ties share the mean rank.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        order[start..end].iter().for_each(|&i| ranks[i] = shared);
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub methods: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
    pub average_ranks: Vec<f64>,
    pub n_blocks: usize,
}

fn blocks_of(scores: &BTreeMap<String, Vec<f64>>) -> Result<(Vec<String>, usize)> {
    if scores.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 methods, got {}",
            scores.len()
        )));
    }
    let methods: Vec<String> = scores.keys().cloned().collect();
    let n = scores.values().next().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 blocks, got {n}")));
    }
    if let Some((m, v)) = scores.iter().find(|(_, v)| v.len() != n) {
        return Err(Error::Config(format!(
            "method {m} has {} scores, expected {n}",
            v.len()
        )));
    }
    Ok((methods, n))
}

/// Friedman chi-square test over methods × blocks:
/// `χ² = 12N / (k(k+1)) · Σ_j (R̄_j − (k+1)/2)²`, with `k − 1` degrees of
/// freedom.
pub fn friedman_test(scores: &BTreeMap<String, Vec<f64>>) -> Result<FriedmanResult> {
    let (methods, n) = blocks_of(scores)?;
    let k = methods.len();
    let mut rank_sums = vec![0.0; k];
    let columns: Vec<&Vec<f64>> = scores.values().collect();
    let mut block = vec![0.0; k];
    for b in 0..n {
        block.iter_mut().zip(&columns).for_each(|(v, c)| *v = c[b]);
        rank_sums
            .iter_mut()
            .zip(rank_descending(&block))
            .for_each(|(s, r)| *s += r);
    }
    let average_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let centre = (k + 1) as f64 / 2.0;
    let spread: f64 = average_ranks.iter().map(|r| (r - centre).powi(2)).sum();
    let statistic = 12.0 * n as f64 / (k * (k + 1)) as f64 * spread;
    let chi2 = ChiSquared::new((k - 1) as f64).map_err(|e| Error::Config(e.to_string()))?;
    let p_value = chi2.sf(statistic).clamp(0.0, 1.0);
    Ok(FriedmanResult {
        methods,
        statistic,
        p_value,
        average_ranks,
        n_blocks: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win,
    Draw,
    Loss,
}

impl Outcome {
    pub fn flipped(self) -> Self {
        match self {
            Outcome::Win => Outcome::Loss,
            Outcome::Draw => Outcome::Draw,
            Outcome::Loss => Outcome::Win,
        }
    }
}

/// Friedman result plus Nemenyi pairwise decisions at one significance level.
#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub label: String,
    pub friedman: FriedmanResult,
    pub alpha: f64,
    pub critical_difference: f64,
    /// `(a, b) → outcome of a against b`, stored for both orders.
    pub pairwise: BTreeMap<(String, String), Outcome>,
}

impl StatReport {
    pub fn rejected(&self) -> bool {
        self.friedman.p_value < self.alpha
    }

    pub fn outcome(&self, a: &str, b: &str) -> Option<Outcome> {
        self.pairwise.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn methods(&self) -> &[String] {
        &self.friedman.methods
    }
}

/// Nemenyi post-hoc comparison. Pairs are only separated when the Friedman
/// test rejects at `alpha` and their average-rank gap exceeds the critical
/// difference; the better-ranked method wins.
pub fn nemenyi_posthoc(scores: &BTreeMap<String, Vec<f64>>, alpha: f64) -> Result<StatReport> {
    check_alpha(alpha)?;
    let friedman = friedman_test(scores)?;
    let k = friedman.methods.len();
    let cd = critical_difference(alpha, k, friedman.n_blocks)?;
    let rejected = friedman.p_value < alpha;
    let mut pairwise = BTreeMap::new();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let gap = friedman.average_ranks[j] - friedman.average_ranks[i];
            let outcome = if !rejected || gap.abs() <= cd {
                Outcome::Draw
            } else if gap > 0.0 {
                Outcome::Win
            } else {
                Outcome::Loss
            };
            pairwise.insert(
                (friedman.methods[i].clone(), friedman.methods[j].clone()),
                outcome,
            );
        }
    }
    Ok(StatReport {
        label: String::new(),
        friedman,
        alpha,
        critical_difference: cd,
        pairwise,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WdlCell {
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

impl WdlCell {
    pub fn total(&self) -> usize {
        self.wins + self.draws + self.losses
    }
}

impl fmt::Display for WdlCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} - {}", self.wins, self.draws, self.losses)
    }
}

/// Per-dataset wins, draws and losses of each proposed method (rows) against
/// each baseline (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct WdlTable {
    pub proposed: Vec<String>,
    pub baselines: Vec<String>,
    pub cells: Vec<Vec<WdlCell>>,
}

impl WdlTable {
    pub fn cell(&self, proposed: &str, baseline: &str) -> Option<WdlCell> {
        let i = self.proposed.iter().position(|p| p == proposed)?;
        let j = self.baselines.iter().position(|b| b == baseline)?;
        Some(self.cells[i][j])
    }
}

impl fmt::Display for WdlTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect();
        let label_w = self
            .proposed
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(1);
        let col_w: Vec<usize> = self
            .baselines
            .iter()
            .enumerate()
            .map(|(j, b)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .max()
                    .unwrap_or(0)
                    .max(b.len())
            })
            .collect();
        write!(f, "{:label_w$}", "")?;
        for (b, w) in self.baselines.iter().zip(&col_w) {
            write!(f, " | {b:^w$}")?;
        }
        writeln!(f)?;
        for (p, row) in self.proposed.iter().zip(&cells) {
            write!(f, "{p:label_w$}")?;
            for (c, w) in row.iter().zip(&col_w) {
                write!(f, " | {c:^w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counts, over the per-dataset reports, how often each proposed method is
/// significantly better than, tied with, or worse than each baseline.
pub fn win_draw_loss(
    reports: &[StatReport],
    proposed: &[String],
    baselines: &[String],
) -> Result<WdlTable> {
    let mut cells = vec![vec![WdlCell::default(); baselines.len()]; proposed.len()];
    for report in reports {
        for (i, p) in proposed.iter().enumerate() {
            for (j, b) in baselines.iter().enumerate() {
                let outcome = report.outcome(p, b).ok_or_else(|| {
                    Error::Config(format!(
                        "method pair ({p}, {b}) not present in report {}",
                        report.label
                    ))
                })?;
                let cell = &mut cells[i][j];
                match outcome {
                    Outcome::Win => cell.wins += 1,
                    Outcome::Draw => cell.draws += 1,
                    Outcome::Loss => cell.losses += 1,
                }
            }
        }
    }
    Ok(WdlTable {
        proposed: proposed.to_vec(),
        baselines: baselines.to_vec(),
        cells,
    })
}
