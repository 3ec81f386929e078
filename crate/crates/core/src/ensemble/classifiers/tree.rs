/// CART-style classification tree with Gini splits. Leaves report
/// Laplace-smoothed class frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    dim: usize,
    n_classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl DecisionTree {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> Self {
        let mut builder = Builder {
            x,
            y,
            n_classes,
            max_depth,
            min_leaf: min_leaf.max(1),
            nodes: Vec::new(),
        };
        let all: Vec<usize> = (0..y.len()).collect();
        builder.grow(all, 0);
        Self {
            nodes: builder.nodes,
            dim: x[0].len(),
            n_classes,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { counts } => {
                    let total: usize = counts.iter().sum();
                    let denom = (total + self.n_classes) as f64;
                    return counts.iter().map(|&c| (c + 1) as f64 / denom).collect();
                }
            }
        }
    }
}

fn sum_sq(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| (c * c) as f64).sum()
}

impl Builder<'_> {
    /// Returns the index of the node built for `rows`.
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        rows.iter().for_each(|&r| counts[self.y[r]] += 1);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            counts: counts.clone(),
        });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&rows, &counts) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x[r][split.feature] <= split.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    /// Maximizes Σ c_l²/n_l + Σ c_r²/n_r, which minimizes the weighted Gini
    /// impurity of the children.
    fn best_split(&self, rows: &[usize], counts: &[usize]) -> Option<SplitChoice> {
        let n = rows.len();
        let parent = sum_sq(counts) / n as f64;
        let mut best: Option<SplitChoice> = None;
        let mut order = rows.to_vec();
        for feature in 0..self.x[0].len() {
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .total_cmp(&self.x[b][feature])
                    .then(a.cmp(&b))
            });
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.to_vec();
            let mut sq_left = 0.0;
            let mut sq_right = sum_sq(counts);
            for p in 1..n {
                let c = self.y[order[p - 1]];
                sq_left += (2 * left[c] + 1) as f64;
                sq_right -= (2 * right[c] - 1) as f64;
                left[c] += 1;
                right[c] -= 1;
                if p < self.min_leaf || n - p < self.min_leaf {
                    continue;
                }
                let lo = self.x[order[p - 1]][feature];
                let hi = self.x[order[p]][feature];
                if lo >= hi {
                    continue;
                }
                let score = sq_left / p as f64 + sq_right / (n - p) as f64;
                if score > parent + 1e-12 && best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: 0.5 * (lo + hi),
                        score,
                    });
                }
            }
        }
        best
    }
}
