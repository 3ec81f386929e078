/// k-nearest neighbours on Euclidean distance; the posterior is the class
/// share among the k closest training rows (ties broken by row order).
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    points: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    k: usize,
    n_classes: usize,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Self {
        let dim = x[0].len();
        Self {
            points: x.iter().flatten().copied().collect(),
            labels: y.to_vec(),
            dim,
            k: k.clamp(1, y.len()),
            n_classes,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut dists: Vec<(f64, usize)> = (0..self.labels.len())
            .map(|i| {
                let p = &self.points[i * self.dim..(i + 1) * self.dim];
                let d = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                (d, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dists.len() {
            dists.select_nth_unstable_by(self.k - 1, cmp);
        }
        let mut counts = vec![0.0; self.n_classes];
        for &(_, i) in &dists[..self.k] {
            counts[self.labels[i]] += 1.0;
        }
        counts.iter_mut().for_each(|c| *c /= self.k as f64);
        counts
    }
}
