//! Dense feed-forward networks trained from scratch: sigmoid autoencoders
//! with greedy layerwise pretraining, a softmax head stacked on the
//! encoders, two-phase supervised fine-tuning, and finite-difference
//! gradient verification.
//!
//! Batches are [`Matrix`] rows. All training is single-threaded and
//! bit-reproducible for a fixed seed, configuration and data order.

mod autoencoder;
mod gradcheck;
mod layer;
mod optim;
mod stack;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use autoencoder::{pretrain_autoencoder, Autoencoder, ReconstructionTask};
pub use gradcheck::{gradient_check, Differentiable, GradientCheck, RegressionTask};
pub use layer::{Activation, DenseLayer, LayerGrad};
pub use stack::{
    finetune_stack, init_stack, predict_top1, ClassificationTask, FinetuneOutcome, GeneralNetwork,
    PretrainTraces, StackedNet,
};

pub use crate::matrix::Matrix;

/// Default layer widths: input, first code, second code, classes.
pub const DEFAULT_DIMS: [usize; 4] = [3750, 100, 50, 5];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("non-finite loss {value} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        value: f64,
    },
    #[error("expected {expected} input columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{inputs} inputs but {labels} labels")]
    LabelCount { inputs: usize, labels: usize },
    #[error("label {label} is outside 0..{classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("training data is empty")]
    EmptyData,
    #[error("invalid layer dimensions {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("layer {index}: {reason}")]
    InvalidLayer { index: usize, reason: &'static str },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
}

/// KL-divergence sparsity penalty on mean hidden activations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityPenalty {
    pub target: f64,
    pub weight: f64,
}

/// Mini-batch SGD with momentum and L2 weight decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Zero skips training entirely.
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// L2 coefficient on weights (not biases).
    pub weight_decay: f64,
    /// Seeds the per-epoch shuffling.
    pub seed: u64,
    /// Autoencoder sparsity term; off unless set.
    #[serde(default)]
    pub sparsity: Option<SparsityPenalty>,
}

impl TrainConfig {
    /// Unsupervised autoencoder defaults.
    pub fn pretrain_default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            seed: 0,
            sparsity: None,
        }
    }

    /// Supervised fine-tuning defaults.
    pub fn finetune_default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.01,
            ..Self::pretrain_default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.batch_size == 0 {
            return Err(NeuralError::InvalidConfig("batch_size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NeuralError::InvalidConfig("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(NeuralError::InvalidConfig("momentum must lie in [0, 1)"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(NeuralError::InvalidConfig(
                "weight_decay must be non-negative",
            ));
        }
        if let Some(s) = self.sparsity {
            if !(s.target > 0.0 && s.target < 1.0 && s.weight >= 0.0) {
                return Err(NeuralError::InvalidConfig(
                    "sparsity target must lie in (0, 1)",
                ));
            }
        }
        Ok(())
    }

    pub fn regularization(&self) -> Regularization {
        Regularization {
            weight_decay: self.weight_decay,
            sparsity: self.sparsity,
        }
    }
}

/// Penalty terms added to a data loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub weight_decay: f64,
    pub sparsity: Option<SparsityPenalty>,
}

/// Head-only then whole-stack supervised training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub head: TrainConfig,
    pub full: TrainConfig,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            head: TrainConfig::finetune_default(),
            full: TrainConfig::finetune_default(),
        }
    }
}

/// A trained model and its per-epoch mean mini-batch loss.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub loss_trace: Vec<f64>,
}
