use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{majority_index, validate_training, Classifier, ClassifierError};
use crate::matrix::Matrix;

/// How many features are examined at each split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    /// `⌈√F⌉`, at least one.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => features,
            MaxFeatures::Sqrt => {
                let mut k = libm::sqrt(features as f64) as usize;
                while k * k < features {
                    k += 1;
                }
                k
            }
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, features.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Root has depth 0; nodes at this depth become leaves.
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 20,
            max_features: MaxFeatures::All,
            min_samples_split: 2,
        }
    }
}

/// Flat tree node; children index into [`DecisionTree::nodes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned binary classification tree grown on Gini impurity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_classes: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| (c as f64 / t) * (c as f64 / t))
        .sum::<f64>()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

struct Grower<'a, R> {
    x: &'a Matrix,
    labels: &'a [usize],
    classes: usize,
    cfg: &'a TreeConfig,
    quota: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
    feature_order: Vec<usize>,
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let mut counts = vec![0usize; self.classes];
        for &i in samples.iter() {
            counts[self.labels[i]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority_index(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || samples.len() < self.cfg.min_samples_split.max(2)
        {
            return id;
        }
        let Some(best) = self.best_split(samples) else {
            return id;
        };
        let mid = partition(samples, |&i| self.x.get(i, best.feature) <= best.threshold);
        let (l, r) = samples.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Lowest weighted child impurity among a random subset of features.
    /// Zero-gain splits are accepted: an impure node is only left as a
    /// leaf when no examined feature separates any of its samples.
    fn best_split(&mut self, samples: &[usize]) -> Option<BestSplit> {
        self.feature_order.shuffle(self.rng);
        let n = samples.len();
        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0usize; self.classes];
        let mut right = vec![0usize; self.classes];
        for (visited, &f) in self.feature_order.iter().enumerate() {
            if visited >= self.quota && best.is_some() {
                break;
            }
            sorted.clear();
            sorted.extend(samples.iter().map(|&i| (self.x.get(i, f), self.labels[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            right.iter_mut().for_each(|c| *c = 0);
            for &(_, y) in &sorted {
                right[y] += 1;
            }
            for k in 0..n - 1 {
                let y = sorted[k].1;
                left[y] += 1;
                right[y] -= 1;
                let (a, b) = (sorted[k].0, sorted[k + 1].0);
                if a == b {
                    continue;
                }
                let nl = k + 1;
                let impurity = (nl as f64 * gini(&left, nl)
                    + (n - nl) as f64 * gini(&right, n - nl))
                    / n as f64;
                if best.as_ref().is_none_or(|s| impurity < s.impurity) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}

/// Stable-order partition; returns the number of elements satisfying `pred`.
fn partition<T: Copy>(items: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let (yes, no): (Vec<T>, Vec<T>) = items.iter().partition(|v| pred(v));
    let mid = yes.len();
    for (slot, v) in items.iter_mut().zip(yes.into_iter().chain(no)) {
        *slot = v;
    }
    mid
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `samples` (repeats allowed, as
    /// in a bootstrap draw).
    pub fn fit_on<R: Rng>(
        x: &Matrix,
        labels: &[usize],
        samples: &[usize],
        classes: usize,
        cfg: &TreeConfig,
        rng: &mut R,
    ) -> Result<Self, ClassifierError> {
        validate_training(x, labels, classes)?;
        if samples.is_empty() {
            return Err(ClassifierError::Empty);
        }
        if samples.iter().any(|&i| i >= x.rows()) {
            return Err(ClassifierError::InvalidConfig("sample index out of range"));
        }
        let mut grower = Grower {
            x,
            labels,
            classes,
            cfg,
            quota: cfg.max_features.resolve(x.cols()),
            rng,
            nodes: Vec::new(),
            feature_order: (0..x.cols()).collect(),
        };
        let mut samples = samples.to_vec();
        grower.grow(&mut samples, 0);
        Ok(DecisionTree {
            nodes: grower.nodes,
            n_features: x.cols(),
            n_classes: classes,
        })
    }

    /// Grows a tree on every row of `x`.
    pub fn fit<R: Rng>(
        x: &Matrix,
        labels: &[usize],
        classes: usize,
        cfg: &TreeConfig,
        rng: &mut R,
    ) -> Result<Self, ClassifierError> {
        let all: Vec<usize> = (0..x.rows()).collect();
        Self::fit_on(x, labels, &all, classes, cfg, rng)
    }

    /// Builds a tree from explicit nodes, root first.
    pub fn from_nodes(
        nodes: Vec<Node>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self, ClassifierError> {
        if nodes.is_empty() {
            return Err(ClassifierError::Empty);
        }
        for (i, node) in nodes.iter().enumerate() {
            let ok = match *node {
                Node::Leaf { class } => class < n_classes,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < n_features
                        && threshold.is_finite()
                        && left > i
                        && right > i
                        && left < nodes.len()
                        && right < nodes.len()
                }
            };
            if !ok {
                return Err(ClassifierError::InvalidConfig("malformed tree node"));
            }
        }
        Ok(DecisionTree {
            nodes,
            n_features,
            n_classes,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl Classifier for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_row(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn sqrt_quota() {
        assert_eq!(MaxFeatures::Sqrt.resolve(71), 9);
        assert_eq!(MaxFeatures::Sqrt.resolve(64), 8);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(100).resolve(5), 5);
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[4, 0], 4), 0.0);
        assert_eq!(gini(&[2, 2], 4), 0.5);
    }

    #[test]
    fn duplicate_points_with_different_labels_stop() {
        let x = Matrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        let t = DecisionTree::fit(&x, &[0, 1], 2, &TreeConfig::default(), &mut seeded(0)).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { class: 0 }]);
    }

    #[test]
    fn depth_cap_respected() {
        let x = Matrix::from_vec(8, 1, (0..8).map(f64::from).collect()).unwrap();
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        let cfg = TreeConfig {
            max_depth: 2,
            ..TreeConfig::default()
        };
        let t = DecisionTree::fit(&x, &y, 2, &cfg, &mut seeded(0)).unwrap();
        assert!(t.depth() <= 2);
    }

    #[test]
    fn malformed_nodes_rejected() {
        let nodes = vec![Node::Split {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 1,
        }];
        assert!(DecisionTree::from_nodes(nodes, 1, 2).is_err());
        assert!(DecisionTree::from_nodes(vec![Node::Leaf { class: 2 }], 1, 2).is_err());
    }
}
