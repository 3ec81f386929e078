use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    Logistic,
    Perceptron,
}

/// Multiclass linear scorer; posteriors are the softmax of the class scores.
/// Row `c` of `weights` holds the bias followed by `dim` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    kind: LinearKind,
    weights: Vec<Vec<f64>>,
    dim: usize,
}

fn score(w: &[f64], x: &[f64]) -> f64 {
    w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

impl LinearModel {
    /// Multinomial logistic regression by full-batch gradient descent.
    pub fn fit_logistic(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        epochs: usize,
        learning_rate: f64,
        l2: f64,
    ) -> Self {
        let dim = x[0].len();
        let n = x.len() as f64;
        let mut weights = vec![vec![0.0; dim + 1]; n_classes];
        let mut grad = vec![vec![0.0; dim + 1]; n_classes];
        let mut scores = vec![0.0; n_classes];
        for _ in 0..epochs {
            grad.iter_mut().for_each(|g| g.fill(0.0));
            for (row, &label) in x.iter().zip(y) {
                scores
                    .iter_mut()
                    .zip(&weights)
                    .for_each(|(s, w)| *s = score(w, row));
                let p = super::softmax(&scores);
                for (c, g) in grad.iter_mut().enumerate() {
                    let err = p[c] - f64::from(u8::from(c == label));
                    g[0] += err;
                    g[1..].iter_mut().zip(row).for_each(|(g, v)| *g += err * v);
                }
            }
            for (w, g) in weights.iter_mut().zip(&grad) {
                w[0] -= learning_rate * g[0] / n;
                for (wj, gj) in w[1..].iter_mut().zip(&g[1..]) {
                    *wj -= learning_rate * (gj / n + l2 * *wj);
                }
            }
        }
        Self {
            kind: LinearKind::Logistic,
            weights,
            dim,
        }
    }

    /// Averaged multiclass perceptron with per-step L2 shrinkage. Examples
    /// are visited in a fresh shuffled order every epoch.
    pub fn fit_perceptron<R: Rng + ?Sized>(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        epochs: usize,
        learning_rate: f64,
        l2: f64,
        rng: &mut R,
    ) -> Self {
        let dim = x[0].len();
        let mut weights = vec![vec![0.0; dim + 1]; n_classes];
        let mut summed = vec![vec![0.0; dim + 1]; n_classes];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let decay = 1.0 - learning_rate * l2;
        let mut steps = 0usize;
        for _ in 0..epochs {
            order.shuffle(rng);
            for &i in &order {
                let row = &x[i];
                let predicted = (0..n_classes)
                    .map(|c| (c, score(&weights[c], row)))
                    .fold((0, f64::NEG_INFINITY), |best, (c, s)| {
                        if s > best.1 {
                            (c, s)
                        } else {
                            best
                        }
                    })
                    .0;
                weights
                    .iter_mut()
                    .for_each(|w| w[1..].iter_mut().for_each(|v| *v *= decay));
                if predicted != y[i] {
                    for (sign, c) in [(1.0, y[i]), (-1.0, predicted)] {
                        let w = &mut weights[c];
                        w[0] += sign * learning_rate;
                        w[1..]
                            .iter_mut()
                            .zip(row)
                            .for_each(|(wj, v)| *wj += sign * learning_rate * v);
                    }
                }
                for (s, w) in summed.iter_mut().zip(&weights) {
                    s.iter_mut().zip(w).for_each(|(a, b)| *a += b);
                }
                steps += 1;
            }
        }
        let scale = 1.0 / steps.max(1) as f64;
        summed
            .iter_mut()
            .for_each(|s| s.iter_mut().for_each(|v| *v *= scale));
        Self {
            kind: LinearKind::Perceptron,
            weights: summed,
            dim,
        }
    }

    pub fn kind(&self) -> LinearKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let scores: Vec<f64> = self.weights.iter().map(|w| score(w, x)).collect();
        super::softmax(&scores)
    }
}
