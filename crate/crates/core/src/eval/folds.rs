use log::warn;
use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::derive_rng;

/// Assignment of every instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    seed: u64,
    stratified: bool,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// False when some class was too small and plain shuffled folds were used.
    pub fn is_stratified(&self) -> bool {
        self.stratified
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.assignments.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}

/// Stratified k-fold partition. Each class is shuffled and dealt round-robin
/// into the folds, continuing the deal where the previous class stopped, so
/// fold sizes differ by at most one and every class is split evenly.
///
/// If any class has fewer than `k` instances the plan falls back to plain
/// shuffled folds.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > d.len() {
        return Err(Error::Config(format!(
            "{}: {k} folds requested for {} instances",
            d.name(),
            d.len()
        )));
    }
    let mut rng = derive_rng(seed, "folds", &[]);
    let mut assignments = vec![0; d.len()];
    let counts = d.class_counts();
    let stratified = counts.iter().all(|&c| c == 0 || c >= k);
    let groups: Vec<Vec<usize>> = if stratified {
        (0..d.n_classes())
            .map(|c| (0..d.len()).filter(|&i| d.labels()[i] == c).collect())
            .collect()
    } else {
        warn!(
            "{}: a class has fewer than {k} instances, using unstratified folds",
            d.name()
        );
        vec![(0..d.len()).collect()]
    };
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for i in group {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        stratified,
    })
}
