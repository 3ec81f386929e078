/// Gaussian naive Bayes with per-class, per-feature variances bounded below
/// by a floor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    dim: usize,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, variance_floor: f64) -> Self {
        let dim = x[0].len();
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; dim]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            counts[c] += 1;
            means[c].iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            if n > 0 {
                m.iter_mut().for_each(|v| *v /= n as f64);
            }
        }
        let mut variances = vec![vec![0.0; dim]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in variances.iter_mut().zip(&counts) {
            s.iter_mut()
                .for_each(|v| *v = (*v / n.max(1) as f64).max(variance_floor));
        }
        let total = y.len() as f64;
        let log_priors = counts
            .iter()
            .map(|&n| {
                if n == 0 {
                    f64::NEG_INFINITY
                } else {
                    (n as f64 / total).ln()
                }
            })
            .collect();
        Self {
            log_priors,
            means,
            variances,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let log_post: Vec<f64> = self
            .log_priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&lp, (means, vars))| {
                if lp == f64::NEG_INFINITY {
                    return lp;
                }
                lp + x
                    .iter()
                    .zip(means.iter().zip(vars))
                    .map(|(v, (m, s2))| {
                        -0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2)
                    })
                    .sum::<f64>()
            })
            .collect();
        super::softmax(&log_post)
    }
}
