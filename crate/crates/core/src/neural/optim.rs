use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{DenseLayer, LayerGrad, NeuralError, TrainConfig};
use crate::rng::seeded;

/// Classical momentum: `v ← μ v − η g`, `θ ← θ + v`.
pub(crate) struct Momentum {
    velocity: Vec<LayerGrad>,
    learning_rate: f64,
    momentum: f64,
}

impl Momentum {
    pub(crate) fn new<'a>(
        layers: impl IntoIterator<Item = &'a DenseLayer>,
        cfg: &TrainConfig,
    ) -> Self {
        Momentum {
            velocity: layers.into_iter().map(LayerGrad::zeros_like).collect(),
            learning_rate: cfg.learning_rate,
            momentum: cfg.momentum,
        }
    }

    pub(crate) fn step<'a>(
        &mut self,
        layers: impl IntoIterator<Item = &'a mut DenseLayer>,
        grads: &[LayerGrad],
    ) {
        let (lr, mu) = (self.learning_rate, self.momentum);
        for ((layer, g), v) in layers.into_iter().zip(grads).zip(&mut self.velocity) {
            for ((p, &gi), vi) in layer
                .weights
                .as_mut_slice()
                .iter_mut()
                .zip(&g.weights)
                .zip(&mut v.weights)
            {
                *vi = mu * *vi - lr * gi;
                *p += *vi;
            }
            for ((p, &gi), vi) in layer.bias.iter_mut().zip(&g.bias).zip(&mut v.bias) {
                *vi = mu * *vi - lr * gi;
                *p += *vi;
            }
        }
    }
}

/// Runs `cfg.epochs` passes over `n` samples in seeded shuffled
/// mini-batches. `step` trains on one batch of indices and returns its
/// loss before the update. Returns the per-epoch size-weighted mean loss.
pub(crate) fn run_epochs<F>(
    n: usize,
    cfg: &TrainConfig,
    mut step: F,
) -> Result<Vec<f64>, NeuralError>
where
    F: FnMut(&[usize]) -> f64,
{
    cfg.validate()?;
    if n == 0 {
        return Err(NeuralError::EmptyData);
    }
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let loss = step(idx);
            if !loss.is_finite() {
                return Err(NeuralError::NonFiniteLoss {
                    epoch,
                    batch,
                    value: loss,
                });
            }
            total += loss * idx.len() as f64;
        }
        trace.push(total / n as f64);
    }
    Ok(trace)
}
