//! Baseline discriminators over fixed-length feature vectors: a bagged
//! forest of Gini decision trees and one-vs-rest Pegasos SVMs with linear
//! or Gaussian kernels.

mod forest;
mod standardize;
mod svm;
mod tree;

pub use forest::{train_random_forest, ForestConfig, RandomForest};
pub use standardize::Standardizer;
pub use svm::{
    argmax_decision, median_gamma, rbf_kernel, train_svm, Kernel, KernelSpec, Machine, SvmConfig,
    SvmModel,
};
pub use tree::{DecisionTree, MaxFeatures, Node, TreeConfig};

use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    Empty,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {label} is outside 0..{classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("invalid classifier configuration: {0}")]
    InvalidConfig(&'static str),
}

/// A trained model mapping one feature vector to a class index.
pub trait Classifier {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;
    /// Prediction for a row already known to have `n_features` entries.
    fn predict_row(&self, x: &[f64]) -> usize;
}

/// Class for one feature vector, checking its length first.
pub fn predict_classifier<C: Classifier + ?Sized>(
    model: &C,
    x: &[f64],
) -> Result<usize, ClassifierError> {
    if x.len() != model.n_features() {
        return Err(ClassifierError::DimensionMismatch {
            expected: model.n_features(),
            actual: x.len(),
        });
    }
    Ok(model.predict_row(x))
}

/// Class for every row of `x`.
pub fn predict_batch<C: Classifier + ?Sized>(
    model: &C,
    x: &Matrix,
) -> Result<alloc::vec::Vec<usize>, ClassifierError> {
    if x.cols() != model.n_features() {
        return Err(ClassifierError::DimensionMismatch {
            expected: model.n_features(),
            actual: x.cols(),
        });
    }
    Ok(x.row_iter().map(|r| model.predict_row(r)).collect())
}

/// Shared checks on a labeled training set.
fn validate_training(x: &Matrix, labels: &[usize], classes: usize) -> Result<(), ClassifierError> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(ClassifierError::Empty);
    }
    if x.rows() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: x.rows(),
            labels: labels.len(),
        });
    }
    if classes == 0 {
        return Err(ClassifierError::InvalidConfig(
            "class count must be positive",
        ));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(ClassifierError::InvalidLabel { label, classes });
    }
    check_finite(x)
}

fn check_finite(x: &Matrix) -> Result<(), ClassifierError> {
    match x.as_slice().iter().position(|v| !v.is_finite()) {
        Some(i) => Err(ClassifierError::NonFinite {
            row: i / x.cols(),
            col: i % x.cols(),
        }),
        None => Ok(()),
    }
}

/// Most frequent class; ties go to the lowest index.
pub(crate) fn majority_index(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}
