use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, TreeConfig};
use super::{majority_index, validate_training, Classifier, ClassifierError};
use crate::matrix::Matrix;
use crate::rng::{mix, seeded};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 10,
            tree: TreeConfig {
                max_features: MaxFeatures::Sqrt,
                ..TreeConfig::default()
            },
        }
    }
}

/// Bagged decision trees voting by simple majority.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    /// Seed tree `t` was grown from, `mix(seed, t)`.
    tree_seeds: Vec<u64>,
}

/// Trains `cfg.n_trees` trees, each on its own bootstrap sample drawn
/// from `mix(seed, t)`.
pub fn train_random_forest(
    x: &Matrix,
    labels: &[usize],
    classes: usize,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<RandomForest, ClassifierError> {
    validate_training(x, labels, classes)?;
    if cfg.n_trees == 0 {
        return Err(ClassifierError::InvalidConfig(
            "a forest needs at least one tree",
        ));
    }
    let n = x.rows();
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut tree_seeds = Vec::with_capacity(cfg.n_trees);
    let mut sample = vec![0usize; n];
    for t in 0..cfg.n_trees {
        let tree_seed = mix(seed, t as u64);
        let mut rng = seeded(tree_seed);
        for s in sample.iter_mut() {
            *s = rng.random_range(0..n);
        }
        trees.push(DecisionTree::fit_on(
            x, labels, &sample, classes, &cfg.tree, &mut rng,
        )?);
        tree_seeds.push(tree_seed);
    }
    Ok(RandomForest { trees, tree_seeds })
}

impl RandomForest {
    /// Assembles a forest from existing trees that agree on shape.
    pub fn from_trees(trees: Vec<DecisionTree>) -> Result<Self, ClassifierError> {
        let first = trees.first().ok_or(ClassifierError::Empty)?;
        let (f, c) = (first.n_features(), first.n_classes());
        if trees
            .iter()
            .any(|t| t.n_features() != f || t.n_classes() != c)
        {
            return Err(ClassifierError::InvalidConfig(
                "trees disagree on feature or class count",
            ));
        }
        let tree_seeds = vec![0; trees.len()];
        Ok(RandomForest { trees, tree_seeds })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    /// Per-class vote counts for one row.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes()];
        for t in &self.trees {
            counts[t.predict_row(x)] += 1;
        }
        counts
    }
}

impl Classifier for RandomForest {
    fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    fn n_classes(&self) -> usize {
        self.trees[0].n_classes()
    }

    fn predict_row(&self, x: &[f64]) -> usize {
        majority_index(&self.votes(x))
    }
}
