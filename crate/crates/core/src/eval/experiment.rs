use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::data::{self, Dataset};
use crate::ensemble::{
    fuse, train_ensemble, Combiner, Composition, Hyperparameters, ScoreMatrix, TieBreaker,
    TiePolicy, TrainOptions,
};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, hash_str};

use super::folds::stratified_kfold;
use super::stats::{nemenyi_posthoc, rank_descending, StatReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSource {
    pub path: PathBuf,
    /// Label column; the last column when absent.
    pub label: Option<String>,
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        let label = match &self.label {
            Some(l) => l.clone(),
            None => data::last_column(&self.path)?,
        };
        data::load_dataset(&self.path, &label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub sizes: Vec<usize>,
    pub combiners: Vec<Combiner>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    /// Significance level for the Friedman and Nemenyi tests.
    pub alpha: f64,
    /// Run (dataset, size, repeat, fold) cells on the rayon pool.
    pub parallel: bool,
    /// Record wall-clock seconds per run; zero otherwise.
    pub timing: bool,
    pub composition: Composition,
    pub hyper: Hyperparameters,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            sizes: Vec::new(),
            combiners: Vec::new(),
            folds: 10,
            repeats: 10,
            seed: 0,
            tie_policy: TiePolicy::LowestIndex,
            alpha: 0.01,
            parallel: true,
            timing: true,
            composition: Composition::default(),
            hyper: Hyperparameters::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Checks everything that does not need the data files.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("no ensemble sizes configured".into()));
        }
        if let Some(s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(Error::Config(format!(
                "ensemble size must be at least 2, got {s}"
            )));
        }
        if self.combiners.is_empty() {
            return Err(Error::Config("no combiners configured".into()));
        }
        let mut seen = HashSet::new();
        if let Some(c) = self.combiners.iter().find(|c| !seen.insert(c.name())) {
            return Err(Error::Config(format!("combiner {c} listed twice")));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.repeats < 1 {
            return Err(Error::Config("need at least 1 repeat".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} is outside (0,1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// One (dataset, size, combiner, repeat, fold) accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub size: usize,
    pub combiner: String,
    pub run: usize,
    pub fold: usize,
    pub accuracy: f64,
    /// Training, member scoring and this combiner's fusion time.
    pub seconds: f64,
}

/// A (dataset, size, repeat, fold) cell whose ensemble could not be built
/// or evaluated. It contributes no records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFailure {
    pub dataset: String,
    pub size: usize,
    pub run: usize,
    pub fold: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub name: String,
    pub instances: usize,
    pub features: usize,
    pub classes: usize,
    pub majority_rate: f64,
    pub stratified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub size: usize,
    pub combiner: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub datasets: Vec<DatasetInfo>,
    pub sizes: Vec<usize>,
    pub combiners: Vec<String>,
    pub runs_per_cell: usize,
    /// Ordered by dataset, size and combiner in configuration order, then
    /// by run and fold.
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ResultTable {
    fn cell_records<'a>(
        &'a self,
        dataset: &'a str,
        size: usize,
        combiner: &'a str,
    ) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.dataset == dataset && r.size == size && r.combiner == combiner)
    }

    /// Per-run accuracies of one cell, in run/fold order.
    pub fn accuracies(&self, dataset: &str, size: usize, combiner: &str) -> Vec<f64> {
        self.cell_records(dataset, size, combiner)
            .map(|r| r.accuracy)
            .collect()
    }

    /// Mean and sample standard deviation of one cell's accuracies.
    pub fn mean_std(&self, dataset: &str, size: usize, combiner: &str) -> Option<(f64, f64)> {
        let acc = self.accuracies(dataset, size, combiner);
        (!acc.is_empty()).then(|| mean_std(&acc))
    }

    /// Average rank of every combiner over the datasets at one size, ranking
    /// mean accuracies (1 = best). Datasets with a missing cell are skipped.
    pub fn average_ranks(&self, size: usize) -> Vec<(String, f64)> {
        let mut sums = vec![0.0; self.combiners.len()];
        let mut used = 0usize;
        for d in &self.datasets {
            let means: Option<Vec<f64>> = self
                .combiners
                .iter()
                .map(|c| self.mean_std(&d.name, size, c).map(|m| m.0))
                .collect();
            if let Some(means) = means {
                sums.iter_mut()
                    .zip(rank_descending(&means))
                    .for_each(|(s, r)| *s += r);
                used += 1;
            }
        }
        self.combiners
            .iter()
            .zip(sums)
            .map(|(c, s)| {
                (
                    c.clone(),
                    if used == 0 { f64::NAN } else { s / used as f64 },
                )
            })
            .collect()
    }

    /// Friedman + Nemenyi over the per-run accuracies of every combiner,
    /// one report per dataset. Runs missing for any combiner are dropped.
    pub fn stat_reports(&self, size: usize, alpha: f64) -> Result<Vec<StatReport>> {
        let mut reports = Vec::with_capacity(self.datasets.len());
        for d in &self.datasets {
            let mut by_run: BTreeMap<(usize, usize), BTreeMap<&str, f64>> = BTreeMap::new();
            for c in &self.combiners {
                for r in self.cell_records(&d.name, size, c) {
                    by_run
                        .entry((r.run, r.fold))
                        .or_default()
                        .insert(c.as_str(), r.accuracy);
                }
            }
            let complete: Vec<&BTreeMap<&str, f64>> = by_run
                .values()
                .filter(|m| m.len() == self.combiners.len())
                .collect();
            let scores: BTreeMap<String, Vec<f64>> = self
                .combiners
                .iter()
                .map(|c| (c.clone(), complete.iter().map(|m| m[c.as_str()]).collect()))
                .collect();
            let mut report = nemenyi_posthoc(&scores, alpha)
                .map_err(|e| Error::Config(format!("{} (size {size}): {e}", d.name)))?;
            report.label = d.name.clone();
            reports.push(report);
        }
        Ok(reports)
    }

    /// Total seconds per (size, combiner) over all datasets and runs.
    pub fn timing_report(&self) -> Vec<TimingRow> {
        let mut rows = Vec::with_capacity(self.sizes.len() * self.combiners.len());
        for &size in &self.sizes {
            for c in &self.combiners {
                let seconds = self
                    .records
                    .iter()
                    .filter(|r| r.size == size && &r.combiner == c)
                    .map(|r| r.seconds)
                    .sum();
                rows.push(TimingRow {
                    size,
                    combiner: c.clone(),
                    seconds,
                });
            }
        }
        rows
    }

    /// Copy with every timing value zeroed, for comparisons.
    pub fn without_timing(&self) -> Self {
        let mut t = self.clone();
        t.records.iter_mut().for_each(|r| r.seconds = 0.0);
        t
    }
}

struct CellTask<'a> {
    dataset: usize,
    size: usize,
    run: usize,
    fold: usize,
    train: Dataset,
    test: &'a Dataset,
    test_rows: Vec<usize>,
}

struct CellOutcome {
    /// Accuracy and seconds per combiner, in configuration order.
    results: Vec<(f64, f64)>,
}

fn run_cell(task: &CellTask<'_>, name_hash: u64, config: &ExperimentConfig) -> Result<CellOutcome> {
    let start = Instant::now();
    let opts = TrainOptions {
        composition: config.composition.clone(),
        hyper: config.hyper,
        tie_policy: config.tie_policy,
        parallel: false,
        ..TrainOptions::new(
            task.size,
            derive_seed(
                config.seed,
                "ensemble",
                &[
                    name_hash,
                    task.size as u64,
                    task.run as u64,
                    task.fold as u64,
                ],
            ),
        )
    };
    let ensemble = train_ensemble(&task.train, &opts)?;
    let scored: Vec<(ScoreMatrix, usize)> = task
        .test_rows
        .iter()
        .map(|&i| {
            Ok((
                ensemble.score_matrix(&task.test.rows()[i])?,
                task.test.labels()[i],
            ))
        })
        .collect::<Result<_>>()?;
    let shared = start.elapsed().as_secs_f64();

    let results = config
        .combiners
        .iter()
        .map(|combiner| {
            let start = Instant::now();
            let mut ties = TieBreaker::new(
                config.tie_policy,
                derive_seed(
                    config.seed,
                    "tie",
                    &[
                        name_hash,
                        task.size as u64,
                        task.run as u64,
                        task.fold as u64,
                        hash_str(combiner.name()),
                    ],
                ),
            );
            let correct = scored
                .iter()
                .filter(|(s, label)| fuse(s, combiner, &mut ties).class_index == *label)
                .count();
            let accuracy = correct as f64 / scored.len() as f64;
            let seconds = if config.timing {
                shared + start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            (accuracy, seconds)
        })
        .collect();
    Ok(CellOutcome { results })
}

/// Loads every configured dataset and runs the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let datasets = config
        .datasets
        .iter()
        .map(DatasetSource::load)
        .collect::<Result<Vec<_>>>()?;
    run_experiment_on(&datasets, config)
}

/// Repeated stratified k-fold evaluation of every (size, combiner) on every
/// dataset. One ensemble is trained per (dataset, size, repeat, fold) cell
/// and shared by all combiners; its seed does not depend on the combiner.
pub fn run_experiment_on(datasets: &[Dataset], config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    if datasets.is_empty() {
        return Err(Error::Config("no datasets configured".into()));
    }
    let mut names = HashSet::new();
    if let Some(d) = datasets.iter().find(|d| !names.insert(d.name())) {
        return Err(Error::Config(format!(
            "dataset name {} used twice",
            d.name()
        )));
    }

    let mut infos = Vec::with_capacity(datasets.len());
    let mut tasks = Vec::new();
    for (di, d) in datasets.iter().enumerate() {
        let name_hash = hash_str(d.name());
        let mut stratified = true;
        for run in 0..config.repeats {
            let plan = stratified_kfold(
                d,
                config.folds,
                derive_seed(config.seed, "folds", &[name_hash, run as u64]),
            )?;
            stratified &= plan.is_stratified();
            for fold in 0..config.folds {
                let train = d.subset(&plan.train_indices(fold));
                let test_rows = plan.test_indices(fold);
                for &size in &config.sizes {
                    tasks.push(CellTask {
                        dataset: di,
                        size,
                        run,
                        fold,
                        train: train.clone(),
                        test: d,
                        test_rows: test_rows.clone(),
                    });
                }
            }
        }
        infos.push(DatasetInfo {
            name: d.name().to_string(),
            instances: d.len(),
            features: d.features().len(),
            classes: d.n_classes(),
            majority_rate: d.majority_rate(),
            stratified,
        });
    }
    info!(
        "running {} cells × {} combiners",
        tasks.len(),
        config.combiners.len()
    );

    let hashes: Vec<u64> = datasets.iter().map(|d| hash_str(d.name())).collect();
    let eval = |t: &CellTask<'_>| run_cell(t, hashes[t.dataset], config);
    let outcomes: Vec<Result<CellOutcome>> = if config.parallel {
        tasks.par_iter().map(eval).collect()
    } else {
        tasks.iter().map(eval).collect()
    };

    let mut keyed = Vec::with_capacity(tasks.len() * config.combiners.len());
    let mut failures = Vec::new();
    for (task, outcome) in tasks.iter().zip(outcomes) {
        let dataset = datasets[task.dataset].name().to_string();
        match outcome {
            Ok(o) => {
                let size_idx = config
                    .sizes
                    .iter()
                    .position(|&s| s == task.size)
                    .unwrap_or(0);
                for (ci, (combiner, (accuracy, seconds))) in
                    config.combiners.iter().zip(o.results).enumerate()
                {
                    keyed.push((
                        (task.dataset, size_idx, ci, task.run, task.fold),
                        RunRecord {
                            dataset: dataset.clone(),
                            size: task.size,
                            combiner: combiner.name().to_string(),
                            run: task.run,
                            fold: task.fold,
                            accuracy,
                            seconds,
                        },
                    ));
                }
            }
            Err(e) => {
                warn!(
                    "{dataset} size {} run {} fold {}: {e}",
                    task.size, task.run, task.fold
                );
                failures.push(CellFailure {
                    dataset,
                    size: task.size,
                    run: task.run,
                    fold: task.fold,
                    message: e.to_string(),
                });
            }
        }
    }
    keyed.sort_by_key(|(k, _)| *k);

    Ok(ResultTable {
        datasets: infos,
        sizes: config.sizes.clone(),
        combiners: config
            .combiners
            .iter()
            .map(|c| c.name().to_string())
            .collect(),
        runs_per_cell: config.repeats * config.folds,
        records: keyed.into_iter().map(|(_, r)| r).collect(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(name: &str) -> Dataset {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            let jitter = (i as f64 * 0.37).sin() * 0.3;
            x.push(vec![c as f64 * 2.0 + jitter, -(c as f64) + jitter * 0.5]);
            y.push(c);
        }
        Dataset::from_numeric(name, x, y, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn config(combiners: &[&str]) -> ExperimentConfig {
        ExperimentConfig {
            sizes: vec![5],
            combiners: combiners.iter().map(|c| c.parse().unwrap()).collect(),
            repeats: 1,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn counts_runs() {
        let t = run_experiment_on(&[blobs("b")], &config(&["arith", "h_arith"])).unwrap();
        assert_eq!(t.accuracies("b", 5, "arith").len(), 10);
        assert_eq!(t.accuracies("b", 5, "h_arith").len(), 10);
        assert_eq!(t.records.len(), 20);
        assert!(t.records.iter().all(|r| (0.0..=1.0).contains(&r.accuracy)));
        assert!(t.failures.is_empty());
    }

    #[test]
    fn deterministic_and_parallel_independent() {
        let cfg = config(&["vote", "h_med", "prod"]);
        let a = run_experiment_on(&[blobs("b")], &cfg).unwrap();
        let b = run_experiment_on(
            &[blobs("b")],
            &ExperimentConfig {
                parallel: false,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
    }

    #[test]
    fn separable_data_is_easy() {
        let t = run_experiment_on(&[blobs("b")], &config(&["h_arith", "max"])).unwrap();
        for c in ["h_arith", "max"] {
            assert!(t.mean_std("b", 5, c).unwrap().0 >= 0.85);
        }
    }

    #[test]
    fn timing_rows_for_every_cell() {
        let cfg = ExperimentConfig {
            sizes: vec![3, 5],
            ..config(&["arith", "h_med"])
        };
        let t = run_experiment_on(&[blobs("b")], &cfg).unwrap();
        let rows = t.timing_report();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.seconds > 0.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let good = config(&["arith"]);
        for bad in [
            ExperimentConfig {
                sizes: vec![1],
                ..good.clone()
            },
            ExperimentConfig {
                folds: 1,
                ..good.clone()
            },
            ExperimentConfig {
                repeats: 0,
                ..good.clone()
            },
            ExperimentConfig {
                combiners: vec![],
                ..good.clone()
            },
            ExperimentConfig {
                alpha: 1.0,
                ..good.clone()
            },
            config(&["arith", "arith"]),
        ] {
            assert!(matches!(
                run_experiment_on(&[blobs("b")], &bad),
                Err(Error::Config(_))
            ));
        }
        assert!(matches!(
            run_experiment_on(&[blobs("b"), blobs("b")], &good),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_experiment_on(&[], &good),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn stat_reports_per_dataset() {
        let t = run_experiment_on(
            &[blobs("b"), blobs("c")],
            &config(&["arith", "h_arith", "vote"]),
        )
        .unwrap();
        let reports = t.stat_reports(5, 0.01).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].label, "b");
        assert_eq!(reports[0].friedman.n_blocks, 10);
    }
}
