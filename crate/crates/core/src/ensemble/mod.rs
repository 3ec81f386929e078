//! Heterogeneous bootstrap ensembles and their fusion rules.

pub mod classifiers;
pub mod fusion;
pub mod preprocess;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Cell, Dataset};
use crate::error::{Error, Result};
use crate::gm::{GmCombiner, ReferentialSelector};
use crate::seed::{derive_rng, derive_seed};

pub use classifiers::{base_predict_proba, BaseClassifier, Family, Hyperparameters};
pub use fusion::{
    classify_fusion, classify_gm, fuse, majority_vote, tie_break, Combiner, Prediction,
    ScoreMatrix, StaticRule, TieBreaker, TiePolicy,
};
pub use preprocess::Preprocessor;

/// Bootstrap draws per member before giving up on covering every class.
pub const BOOTSTRAP_RETRIES: usize = 10;

/// Family mix of an ensemble. Member counts are assigned round-robin over
/// the listed families, then members are grouped in list order, so the
/// default list yields `knn, knn, tree, tree, nb, logreg, perceptron` at
/// size 7.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition(Vec<Family>);

impl Composition {
    pub fn new(families: Vec<Family>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::Config(
                "composition needs at least one family".into(),
            ));
        }
        Ok(Self(families))
    }

    pub fn families(&self) -> &[Family] {
        &self.0
    }

    pub fn members(&self, size: usize) -> Vec<Family> {
        let k = self.0.len();
        let mut counts = vec![0usize; k];
        (0..size).for_each(|m| counts[m % k] += 1);
        self.0
            .iter()
            .zip(counts)
            .flat_map(|(&f, c)| std::iter::repeat_n(f, c))
            .collect()
    }
}

impl Default for Composition {
    fn default() -> Self {
        Self(Family::ALL.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub size: usize,
    pub composition: Composition,
    pub hyper: Hyperparameters,
    pub seed: u64,
    pub combiner: Combiner,
    pub tie_policy: TiePolicy,
    /// Train members on the rayon pool. Results do not depend on this flag.
    pub parallel: bool,
}

impl TrainOptions {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            composition: Composition::default(),
            hyper: Hyperparameters::default(),
            seed,
            combiner: Combiner::Gm(GmCombiner::new(ReferentialSelector::ArithmeticMean)),
            tie_policy: TiePolicy::LowestIndex,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<BaseClassifier>,
    preprocessor: Preprocessor,
    classes: Vec<String>,
    combiner: Combiner,
    tie_policy: TiePolicy,
    seed: u64,
}

/// Index multiset of size `n` drawn with replacement, redrawn until it
/// covers every class present in `labels`.
fn bootstrap_sample<R: Rng + ?Sized>(
    labels: &[usize],
    n_classes: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let n = labels.len();
    let mut present = vec![false; n_classes];
    labels.iter().for_each(|&l| present[l] = true);
    for _ in 0..BOOTSTRAP_RETRIES {
        let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut covered = vec![false; n_classes];
        sample.iter().for_each(|&i| covered[labels[i]] = true);
        if covered == present {
            return Some(sample);
        }
    }
    None
}

pub fn train_ensemble(train: &Dataset, opts: &TrainOptions) -> Result<Ensemble> {
    if opts.size < 2 {
        return Err(Error::Config(format!(
            "ensemble size must be at least 2, got {}",
            opts.size
        )));
    }
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Training(
            "training set has fewer than 2 classes".into(),
        ));
    }
    let preprocessor = Preprocessor::fit(train);
    let x = preprocessor.transform_all(train.rows())?;
    let y = train.labels();
    let n_classes = train.n_classes();

    let fit_member = |(m, family): (usize, Family)| -> Result<BaseClassifier> {
        let mut boot_rng = derive_rng(opts.seed, "bootstrap", &[m as u64]);
        let sample = bootstrap_sample(y, n_classes, &mut boot_rng).ok_or_else(|| {
            Error::Training(format!(
                "member {m}: bootstrap missed a class {BOOTSTRAP_RETRIES} times"
            ))
        })?;
        let xs: Vec<Vec<f64>> = sample.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<usize> = sample.iter().map(|&i| y[i]).collect();
        let mut member = BaseClassifier::new(family, opts.hyper);
        let mut fit_rng = derive_rng(opts.seed, "member", &[m as u64]);
        member.fit(&xs, &ys, n_classes, &mut fit_rng)?;
        Ok(member)
    };
    let plan: Vec<(usize, Family)> = opts
        .composition
        .members(opts.size)
        .into_iter()
        .enumerate()
        .collect();
    let members = if opts.parallel {
        plan.into_par_iter()
            .map(fit_member)
            .collect::<Result<Vec<_>>>()?
    } else {
        plan.into_iter()
            .map(fit_member)
            .collect::<Result<Vec<_>>>()?
    };

    Ok(Ensemble {
        members,
        preprocessor,
        classes: train.classes().to_vec(),
        combiner: opts.combiner,
        tie_policy: opts.tie_policy,
        seed: opts.seed,
    })
}

impl Ensemble {
    pub fn members(&self) -> &[BaseClassifier] {
        &self.members
    }

    pub fn families(&self) -> Vec<Family> {
        self.members.iter().map(BaseClassifier::family).collect()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn with_combiner(mut self, combiner: Combiner) -> Self {
        self.combiner = combiner;
        self
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    /// Stacks every member's posterior for one instance.
    pub fn score_matrix(&self, instance: &[Cell]) -> Result<ScoreMatrix> {
        let x = self.preprocessor.transform(instance)?;
        let rows = self
            .members
            .iter()
            .map(|m| m.predict_proba(&x))
            .collect::<Result<Vec<_>>>()?;
        ScoreMatrix::new(rows)
    }

    /// Classifies one instance with the configured combiner. Seeded-random
    /// ties draw from a stream keyed by the ensemble seed and the instance
    /// values, so repeated calls agree.
    pub fn predict(&self, instance: &[Cell]) -> Result<Prediction> {
        let scores = self.score_matrix(instance)?;
        let key = instance
            .iter()
            .map(|c| match c {
                Cell::Num(v) => v.to_bits(),
                Cell::Cat(l) => u64::from(*l),
                Cell::Missing => u64::MAX,
            })
            .collect::<Vec<_>>();
        let mut ties =
            TieBreaker::new(self.tie_policy, derive_seed(self.seed, "predict-tie", &key));
        Ok(fuse(&scores, &self.combiner, &mut ties))
    }
}

pub fn predict(ensemble: &Ensemble, instance: &[Cell]) -> Result<Prediction> {
    ensemble.predict(instance)
}
