//! Leave-one-position-out validation: fold plans, confusion matrices,
//! one-vs-rest sensitivity and specificity, and mean ± sd aggregation.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::stats::{mean, sample_sd};

/// Sample positions in a full dataset, numbered from 1.
pub const NUM_POSITIONS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("position {0} has no samples")]
    MissingPosition(u32),
    #[error("unexpected position {0}")]
    UnknownPosition(u32),
    #[error("{predictions} predictions but {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("class {class} is outside 0..{classes}")]
    InvalidClass { class: usize, classes: usize },
    #[error("nothing to evaluate")]
    Empty,
}

/// One held-out position and the positions trained on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub test_position: u32,
    pub train_positions: Vec<u32>,
}

impl Fold {
    /// Splits sample indices by their position into `(train, test)`.
    pub fn split(&self, positions: &[u32]) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &p) in positions.iter().enumerate() {
            if p == self.test_position {
                test.push(i);
            } else if self.train_positions.contains(&p) {
                train.push(i);
            }
        }
        (train, test)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

/// One fold per position `1..=NUM_POSITIONS`, each holding out that
/// position. Every position must occur among `positions`.
pub fn position_folds(positions: &[u32]) -> Result<FoldPlan, EvalError> {
    if let Some(&p) = positions.iter().find(|&&p| p == 0 || p > NUM_POSITIONS) {
        return Err(EvalError::UnknownPosition(p));
    }
    let all: Vec<u32> = (1..=NUM_POSITIONS).collect();
    if let Some(&p) = all.iter().find(|p| !positions.contains(p)) {
        return Err(EvalError::MissingPosition(p));
    }
    let folds = all
        .iter()
        .map(|&test| Fold {
            test_position: test,
            train_positions: all.iter().copied().filter(|&p| p != test).collect(),
        })
        .collect();
    Ok(FoldPlan { folds })
}

/// Binary counts for one class against the rest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl BinaryCounts {
    /// `TP / (TP + FN)`, undefined when the class never occurs.
    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `TN / (TN + FP)`, undefined when every sample is of the class.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Square count matrix; rows are expected classes, columns observed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_predictions(
        predictions: &[usize],
        truths: &[usize],
        classes: usize,
    ) -> Result<Self, EvalError> {
        if predictions.len() != truths.len() {
            return Err(EvalError::LengthMismatch {
                predictions: predictions.len(),
                truths: truths.len(),
            });
        }
        let mut m = Self::new(classes);
        for (&p, &t) in predictions.iter().zip(truths) {
            m.record(t, p)?;
        }
        Ok(m)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<(), EvalError> {
        for class in [truth, predicted] {
            if class >= self.classes {
                return Err(EvalError::InvalidClass {
                    class,
                    classes: self.classes,
                });
            }
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    /// Adds another matrix of the same size.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes, "confusion matrix sizes differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.classes..(truth + 1) * self.classes]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.trace(), self.total())
    }

    /// Collapses the matrix to class `k` against all others.
    pub fn one_vs_rest(&self, k: usize) -> BinaryCounts {
        let tp = self.get(k, k);
        let row: u64 = self.row(k).iter().sum();
        let col: u64 = (0..self.classes).map(|t| self.get(t, k)).sum();
        BinaryCounts {
            tp,
            fn_: row - tp,
            fp: col - tp,
            tn: self.total() + tp - row - col,
        }
    }

    pub fn summary(&self) -> Result<MetricsSummary, EvalError> {
        let accuracy = self.accuracy().ok_or(EvalError::Empty)?;
        let per_class: Vec<ClassMetrics> = (0..self.classes)
            .map(|k| {
                let b = self.one_vs_rest(k);
                ClassMetrics {
                    sensitivity: b.sensitivity(),
                    specificity: b.specificity(),
                    accuracy: b.accuracy().unwrap_or(0.0),
                    support: b.tp + b.fn_,
                }
            })
            .collect();
        let included: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
        let excluded_classes = (0..self.classes)
            .filter(|&k| per_class[k].support == 0)
            .collect();
        let macro_of = |f: &dyn Fn(&ClassMetrics) -> Option<f64>| {
            let v: Vec<f64> = included.iter().filter_map(|m| f(m)).collect();
            if v.is_empty() {
                f64::NAN
            } else {
                mean(&v)
            }
        };
        Ok(MetricsSummary {
            macro_sensitivity: macro_of(&|m| m.sensitivity),
            macro_specificity: macro_of(&|m| m.specificity),
            macro_accuracy: macro_of(&|m| Some(m.accuracy)),
            accuracy,
            per_class,
            excluded_classes,
        })
    }
}

/// One-vs-rest metrics for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    /// `(TP + TN) / total` of the collapsed 2×2 table.
    pub accuracy: f64,
    /// Samples whose true class is this one.
    pub support: u64,
}

/// Metrics of one confusion matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted means over classes present in the truth labels.
    pub macro_sensitivity: f64,
    pub macro_specificity: f64,
    pub macro_accuracy: f64,
    /// Multiclass accuracy, `trace / total`.
    pub accuracy: f64,
    /// Classes absent from the truth labels and left out of macro means.
    pub excluded_classes: Vec<usize>,
}

pub fn confusion_and_metrics(
    predictions: &[usize],
    truths: &[usize],
    classes: usize,
) -> Result<(ConfusionMatrix, MetricsSummary), EvalError> {
    let m = ConfusionMatrix::from_predictions(predictions, truths, classes)?;
    let s = m.summary()?;
    Ok((m, s))
}

/// Sample mean and sample standard deviation (`n − 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Summary of repeated measurements; a single value has sd 0. NaN entries
/// (undefined metrics) are skipped.
pub fn aggregate(values: &[f64]) -> MeanSd {
    let v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    match v.len() {
        0 => MeanSd {
            mean: f64::NAN,
            sd: f64::NAN,
            n: 0,
        },
        1 => MeanSd {
            mean: v[0],
            sd: 0.0,
            n: 1,
        },
        n => MeanSd {
            mean: mean(&v),
            sd: sample_sd(&v),
            n,
        },
    }
}

/// Most common prediction; ties go to the lowest class.
pub fn majority_vote(predictions: &[usize], classes: usize) -> Option<usize> {
    if predictions.is_empty() {
        return None;
    }
    let mut counts = vec![0usize; classes];
    for &p in predictions {
        counts[p] += 1;
    }
    Some(crate::classifiers::majority_index(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_folds() {
        let plan = position_folds(&[1, 2, 3, 4, 5, 6, 6, 1]).unwrap();
        assert_eq!(plan.folds.len(), 6);
        assert_eq!(plan.folds[2].test_position, 3);
        assert_eq!(plan.folds[2].train_positions, vec![1, 2, 4, 5, 6]);
        assert_eq!(
            position_folds(&[1, 2, 3, 4, 6]),
            Err(EvalError::MissingPosition(5))
        );
        assert_eq!(
            position_folds(&[1, 2, 3, 4, 5, 6, 7]),
            Err(EvalError::UnknownPosition(7))
        );
    }

    #[test]
    fn binary_fixture() {
        // 10 positives (8 hit), 10 negatives (1 false alarm).
        let mut truth = vec![1; 10];
        truth.extend(vec![0; 10]);
        let mut pred = vec![1; 8];
        pred.extend([0, 0]);
        pred.push(1);
        pred.extend(vec![0; 9]);
        let (m, s) = confusion_and_metrics(&pred, &truth, 2).unwrap();
        let b = m.one_vs_rest(1);
        assert_eq!((b.tp, b.fn_, b.fp, b.tn), (8, 2, 1, 9));
        assert_eq!(b.sensitivity(), Some(0.8));
        assert_eq!(b.specificity(), Some(0.9));
        assert_eq!(s.accuracy, 17.0 / 20.0);
    }

    #[test]
    fn absent_class_excluded() {
        let (_, s) = confusion_and_metrics(&[0, 1, 1], &[0, 1, 1], 3).unwrap();
        assert_eq!(s.excluded_classes, vec![2]);
        assert_eq!(s.macro_sensitivity, 1.0);
        assert_eq!(s.per_class[2].sensitivity, None);
    }

    #[test]
    fn errors() {
        assert!(confusion_and_metrics(&[0], &[0, 1], 2).is_err());
        assert!(confusion_and_metrics(&[2], &[0], 2).is_err());
        assert_eq!(confusion_and_metrics(&[], &[], 2), Err(EvalError::Empty));
    }

    #[test]
    fn aggregate_edge_cases() {
        assert_eq!(aggregate(&[0.5]).sd, 0.0);
        assert_eq!(aggregate(&[]).n, 0);
        let a = aggregate(&[1.0, f64::NAN, 3.0]);
        assert_eq!((a.mean, a.n), (2.0, 2));
        assert!((a.sd - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn votes() {
        assert_eq!(majority_vote(&[0, 0, 1], 5), Some(0));
        assert_eq!(majority_vote(&[3, 1], 5), Some(1));
        assert_eq!(majority_vote(&[], 5), None);
    }
}
