use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::{validate_training, Classifier, ClassifierError};
use crate::matrix::Matrix;
use crate::rng::{mix, seeded};
use crate::stats::dot;

/// Kernel requested at training time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Linear,
    /// `None` picks gamma by the median heuristic.
    Rbf {
        gamma: Option<f64>,
    },
}

/// Kernel used by a trained model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    /// Pegasos regularization strength.
    pub lambda: f64,
    /// Stochastic steps per machine are `epochs × n`.
    pub epochs: usize,
    pub seed: u64,
}

impl SvmConfig {
    pub fn linear() -> Self {
        SvmConfig {
            kernel: KernelSpec::Linear,
            lambda: 1e-3,
            epochs: 20,
            seed: 0,
        }
    }

    pub fn rbf() -> Self {
        SvmConfig {
            kernel: KernelSpec::Rbf { gamma: None },
            ..Self::linear()
        }
    }
}

/// One binary one-vs-rest machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Machine {
    /// `f(z) = w·z + b`.
    Linear { weights: Vec<f64>, bias: f64 },
    /// `f(z) = Σ_j β_j K(s_j, z)` over the model's support rows.
    Kernel { coefficients: Vec<f64> },
}

/// One-vs-rest SVM on standardized features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub lambda: f64,
    /// Fitted on the training rows; applied to every input.
    pub standardizer: Standardizer,
    /// Standardized training rows with a nonzero coefficient in some
    /// machine. Empty for linear models.
    pub support: Matrix,
    pub machines: Vec<Machine>,
}

/// `exp(−γ ‖x − y‖²)`.
pub fn rbf_kernel(gamma: f64, x: &[f64], y: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    libm::exp(-gamma * d2)
}

/// `1 / (2 m²)` where `m` is the median Euclidean distance over all pairs
/// of distinct rows. Falls back to 1 when there are fewer than two rows or
/// all rows coincide.
pub fn median_gamma(x: &Matrix) -> f64 {
    let n = x.rows();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d.push(libm::sqrt(s));
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let median = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    if median > 0.0 {
        1.0 / (2.0 * median * median)
    } else {
        1.0
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_decision(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

fn binary_targets(labels: &[usize], k: usize) -> Vec<f64> {
    labels
        .iter()
        .map(|&l| if l == k { 1.0 } else { -1.0 })
        .collect()
}

/// Primal Pegasos on `[z, 1]` with projection onto the `1/√λ` ball.
fn pegasos_linear<R: Rng>(
    z: &Matrix,
    y: &[f64],
    lambda: f64,
    steps: usize,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let f = z.cols();
    let mut w = vec![0.0; f];
    let mut b = 0.0;
    let radius2 = 1.0 / lambda;
    for t in 1..=steps {
        let i = rng.random_range(0..z.rows());
        let x = z.row(i);
        let eta = 1.0 / (lambda * t as f64);
        let margin = y[i] * (dot(&w, x) + b);
        let shrink = 1.0 - eta * lambda;
        w.iter_mut().for_each(|v| *v *= shrink);
        b *= shrink;
        if margin < 1.0 {
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += eta * y[i] * xi;
            }
            b += eta * y[i];
        }
        let norm2 = dot(&w, &w) + b * b;
        if norm2 > radius2 {
            let s = libm::sqrt(radius2 / norm2);
            w.iter_mut().for_each(|v| *v *= s);
            b *= s;
        }
    }
    (w, b)
}

/// Kernelized Pegasos: returns the hit counts `α`. The implied decision
/// function is `f(x) = (1/(λT)) Σ_j α_j y_j K(x_j, x)`.
fn pegasos_kernel<R: Rng>(
    gram: &Matrix,
    y: &[f64],
    lambda: f64,
    steps: usize,
    rng: &mut R,
) -> Vec<u32> {
    let n = gram.rows();
    let mut alpha = vec![0u32; n];
    // g[i] = Σ_j α_j y_j K(x_j, x_i), updated whenever some α_j changes.
    let mut g = vec![0.0; n];
    for t in 1..=steps {
        let i = rng.random_range(0..n);
        if y[i] * g[i] / (lambda * t as f64) < 1.0 {
            alpha[i] += 1;
            for (gj, k) in g.iter_mut().zip(gram.row(i)) {
                *gj += y[i] * k;
            }
        }
    }
    alpha
}

fn gram_matrix(z: &Matrix, gamma: f64) -> Matrix {
    let n = z.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k.set(i, i, 1.0);
        for j in i + 1..n {
            let v = rbf_kernel(gamma, z.row(i), z.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// Trains one machine per class in `0..classes`, each against all other
/// classes, on features z-scored with statistics of `x` itself.
pub fn train_svm(
    x: &Matrix,
    labels: &[usize],
    classes: usize,
    cfg: &SvmConfig,
) -> Result<SvmModel, ClassifierError> {
    validate_training(x, labels, classes)?;
    if !(cfg.lambda.is_finite() && cfg.lambda > 0.0) {
        return Err(ClassifierError::InvalidConfig("lambda must be positive"));
    }
    if cfg.epochs == 0 {
        return Err(ClassifierError::InvalidConfig("epochs must be positive"));
    }
    let standardizer = Standardizer::fit(x)?;
    let z = standardizer.transform(x);
    let steps = cfg.epochs * z.rows();
    match cfg.kernel {
        KernelSpec::Linear => {
            let machines = (0..classes)
                .map(|k| {
                    let y = binary_targets(labels, k);
                    let (weights, bias) = pegasos_linear(
                        &z,
                        &y,
                        cfg.lambda,
                        steps,
                        &mut seeded(mix(cfg.seed, k as u64)),
                    );
                    Machine::Linear { weights, bias }
                })
                .collect();
            Ok(SvmModel {
                kernel: Kernel::Linear,
                lambda: cfg.lambda,
                standardizer,
                support: Matrix::zeros(0, z.cols()),
                machines,
            })
        }
        KernelSpec::Rbf { gamma } => {
            let gamma = match gamma {
                Some(g) if g.is_finite() && g > 0.0 => g,
                Some(_) => return Err(ClassifierError::InvalidConfig("gamma must be positive")),
                None => median_gamma(&z),
            };
            let gram = gram_matrix(&z, gamma);
            let scale = 1.0 / (cfg.lambda * steps as f64);
            let dense: Vec<Vec<f64>> = (0..classes)
                .map(|k| {
                    let y = binary_targets(labels, k);
                    let alpha = pegasos_kernel(
                        &gram,
                        &y,
                        cfg.lambda,
                        steps,
                        &mut seeded(mix(cfg.seed, k as u64)),
                    );
                    alpha
                        .iter()
                        .zip(&y)
                        .map(|(&a, &yi)| a as f64 * yi * scale)
                        .collect()
                })
                .collect();
            let keep: Vec<usize> = (0..z.rows())
                .filter(|&j| dense.iter().any(|c| c[j] != 0.0))
                .collect();
            let machines = dense
                .into_iter()
                .map(|c| Machine::Kernel {
                    coefficients: keep.iter().map(|&j| c[j]).collect(),
                })
                .collect();
            Ok(SvmModel {
                kernel: Kernel::Rbf { gamma },
                lambda: cfg.lambda,
                standardizer,
                support: z.select_rows(&keep),
                machines,
            })
        }
    }
}

impl SvmModel {
    fn decision_standardized(&self, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.kernel {
            Kernel::Linear => out.extend(self.machines.iter().map(|m| match m {
                Machine::Linear { weights, bias } => dot(weights, z) + bias,
                Machine::Kernel { .. } => f64::NAN,
            })),
            Kernel::Rbf { gamma } => {
                let k: Vec<f64> = self
                    .support
                    .row_iter()
                    .map(|s| rbf_kernel(gamma, s, z))
                    .collect();
                out.extend(self.machines.iter().map(|m| match m {
                    Machine::Kernel { coefficients } => dot(coefficients, &k),
                    Machine::Linear { .. } => f64::NAN,
                }));
            }
        }
    }

    /// One-vs-rest decision values for a raw (unstandardized) row.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        if x.len() != self.standardizer.dim() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.standardizer.dim(),
                actual: x.len(),
            });
        }
        let mut z = vec![0.0; x.len()];
        self.standardizer.apply_row(x, &mut z);
        let mut out = Vec::with_capacity(self.machines.len());
        self.decision_standardized(&z, &mut out);
        Ok(out)
    }

    /// Regularized hinge objective `λ/2 ‖w‖² + (1/n) Σ max(0, 1 − y f(x))`
    /// of each machine on a labeled set. An all-zero machine scores 1.
    pub fn objectives(&self, x: &Matrix, labels: &[usize]) -> Result<Vec<f64>, ClassifierError> {
        validate_training(x, labels, self.machines.len())?;
        let mut hinge = vec![0.0; self.machines.len()];
        for (row, &label) in x.row_iter().zip(labels) {
            let f = self.decision_values(row)?;
            for (k, (h, v)) in hinge.iter_mut().zip(f).enumerate() {
                let y = if label == k { 1.0 } else { -1.0 };
                *h += (1.0 - y * v).max(0.0);
            }
        }
        let n = x.rows() as f64;
        Ok(self
            .machines
            .iter()
            .zip(hinge)
            .map(|(m, h)| 0.5 * self.lambda * self.norm2(m) + h / n)
            .collect())
    }

    fn norm2(&self, m: &Machine) -> f64 {
        match (m, self.kernel) {
            (Machine::Linear { weights, bias }, _) => dot(weights, weights) + bias * bias,
            (Machine::Kernel { coefficients }, Kernel::Rbf { gamma }) => {
                let mut s = 0.0;
                for (i, a) in self.support.row_iter().zip(coefficients) {
                    for (j, b) in self.support.row_iter().zip(coefficients) {
                        s += a * b * rbf_kernel(gamma, i, j);
                    }
                }
                s
            }
            (Machine::Kernel { .. }, Kernel::Linear) => f64::NAN,
        }
    }
}

impl Classifier for SvmModel {
    fn n_features(&self) -> usize {
        self.standardizer.dim()
    }

    fn n_classes(&self) -> usize {
        self.machines.len()
    }

    fn predict_row(&self, x: &[f64]) -> usize {
        let mut z = vec![0.0; x.len()];
        self.standardizer.apply_row(x, &mut z);
        let mut out = Vec::with_capacity(self.machines.len());
        self.decision_standardized(&z, &mut out);
        argmax_decision(&out)
    }
}
