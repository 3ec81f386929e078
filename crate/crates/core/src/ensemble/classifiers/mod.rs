//! Base classifiers producing posterior rows.
//!
//! Every family works on dense, preprocessed feature vectors and returns a
//! distribution over the full class list. Rows are pulled away from exact
//! 0/1 by [`POSTERIOR_FLOOR`] so a single confident member cannot zero out a
//! product rule.

mod knn;
mod linear;
mod naive_bayes;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

pub use knn::Knn;
pub use linear::{LinearKind, LinearModel};
pub use naive_bayes::GaussianNb;
pub use tree::DecisionTree;

pub const POSTERIOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Knn,
    DecisionTree,
    GaussianNaiveBayes,
    LogisticRegression,
    Perceptron,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Knn,
        Family::DecisionTree,
        Family::GaussianNaiveBayes,
        Family::LogisticRegression,
        Family::Perceptron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Knn => "knn",
            Family::DecisionTree => "tree",
            Family::GaussianNaiveBayes => "nb",
            Family::LogisticRegression => "logreg",
            Family::Perceptron => "perceptron",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" | "k-nn" => Ok(Family::Knn),
            "tree" | "decision-tree" => Ok(Family::DecisionTree),
            "nb" | "naive-bayes" | "gaussian-naive-bayes" => Ok(Family::GaussianNaiveBayes),
            "logreg" | "logistic-regression" => Ok(Family::LogisticRegression),
            "perceptron" => Ok(Family::Perceptron),
            other => Err(Error::Config(format!(
                "unknown classifier family `{other}` (supported: knn, tree, nb, logreg, perceptron)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub knn_k: usize,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub nb_variance_floor: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            knn_k: 5,
            tree_max_depth: 12,
            tree_min_leaf: 2,
            nb_variance_floor: 1e-9,
            epochs: 200,
            learning_rate: 0.1,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Knn(Knn),
    Tree(DecisionTree),
    NaiveBayes(GaussianNb),
    Linear(LinearModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseClassifier {
    family: Family,
    hyper: Hyperparameters,
    model: Option<Model>,
}

impl BaseClassifier {
    pub fn new(family: Family, hyper: Hyperparameters) -> Self {
        Self {
            family,
            hyper,
            model: None,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    /// Fits on rows `x` with labels in `0..n_classes`. The generator is only
    /// consumed by families with stochastic training (the perceptron).
    pub fn fit<R: Rng + ?Sized>(
        &mut self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        rng: &mut R,
    ) -> Result<()> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Training(format!(
                "{} rows and {} labels",
                x.len(),
                y.len()
            )));
        }
        if y.iter().any(|&c| c >= n_classes) {
            return Err(Error::Training("label outside the class list".into()));
        }
        let h = &self.hyper;
        let model = match self.family {
            Family::Knn => Model::Knn(Knn::fit(x, y, n_classes, h.knn_k)),
            Family::DecisionTree => Model::Tree(DecisionTree::fit(
                x,
                y,
                n_classes,
                h.tree_max_depth,
                h.tree_min_leaf,
            )),
            Family::GaussianNaiveBayes => {
                Model::NaiveBayes(GaussianNb::fit(x, y, n_classes, h.nb_variance_floor))
            }
            Family::LogisticRegression => Model::Linear(LinearModel::fit_logistic(
                x,
                y,
                n_classes,
                h.epochs,
                h.learning_rate,
                h.l2,
            )),
            Family::Perceptron => Model::Linear(LinearModel::fit_perceptron(
                x,
                y,
                n_classes,
                h.epochs,
                h.learning_rate,
                h.l2,
                rng,
            )),
        };
        self.model = Some(model);
        Ok(())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let model = self.model.as_ref().ok_or(Error::Unfitted)?;
        let dim = match model {
            Model::Knn(m) => m.dim(),
            Model::Tree(m) => m.dim(),
            Model::NaiveBayes(m) => m.dim(),
            Model::Linear(m) => m.dim(),
        };
        if x.len() != dim {
            return Err(Error::Feature(format!(
                "instance has {} encoded features, classifier expects {dim}",
                x.len()
            )));
        }
        let raw = match model {
            Model::Knn(m) => m.predict_proba(x),
            Model::Tree(m) => m.predict_proba(x),
            Model::NaiveBayes(m) => m.predict_proba(x),
            Model::Linear(m) => m.predict_proba(x),
        };
        Ok(smooth(raw))
    }
}

/// Posterior row of a fitted classifier.
pub fn base_predict_proba(classifier: &BaseClassifier, x: &[f64]) -> Result<Vec<f64>> {
    classifier.predict_proba(x)
}

fn smooth(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().map(|v| v + POSTERIOR_FLOOR).sum();
    p.iter_mut()
        .for_each(|v| *v = (*v + POSTERIOR_FLOOR) / total);
    p
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let exp: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}
