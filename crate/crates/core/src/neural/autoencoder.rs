use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layer::activation_backward;
use super::optim::{run_epochs, Momentum};
use super::{
    Activation, DenseLayer, LayerGrad, Matrix, NeuralError, Regularization, TrainConfig,
    TrainOutcome,
};
use crate::rng::seeded;

/// Sigmoid encoder/decoder pair with untied weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub encoder: DenseLayer,
    pub decoder: DenseLayer,
}

/// Inputs to reconstruct plus the penalty terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionTask {
    pub inputs: Matrix,
    pub regularization: Regularization,
}

/// Mean hidden activations are kept away from 0 and 1 so the KL term stays
/// finite.
const RHO_EPS: f64 = 1e-12;

fn kl_divergence(target: f64, rho: f64) -> f64 {
    target * libm::log(target / rho) + (1.0 - target) * libm::log((1.0 - target) / (1.0 - rho))
}

impl Autoencoder {
    /// Xavier-initialized `input → hidden → input` autoencoder.
    pub fn init(seed: u64, input: usize, hidden: usize) -> Self {
        let mut rng = seeded(seed);
        let encoder = DenseLayer::xavier(&mut rng, input, hidden, Activation::Sigmoid);
        let decoder = DenseLayer::xavier(&mut rng, hidden, input, Activation::Sigmoid);
        Autoencoder { encoder, decoder }
    }

    pub fn new(encoder: DenseLayer, decoder: DenseLayer) -> Result<Self, NeuralError> {
        if decoder.output_dim() != encoder.input_dim()
            || decoder.input_dim() != encoder.output_dim()
        {
            return Err(NeuralError::InvalidDims(alloc::vec![
                encoder.input_dim(),
                encoder.output_dim(),
                decoder.input_dim(),
                decoder.output_dim(),
            ]));
        }
        if encoder.activation == Activation::Softmax || decoder.activation == Activation::Softmax {
            return Err(NeuralError::InvalidLayer {
                index: 0,
                reason: "autoencoder layers cannot use softmax",
            });
        }
        Ok(Autoencoder { encoder, decoder })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn code_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn encode(&self, x: &Matrix) -> Matrix {
        self.encoder.forward(x)
    }

    pub fn reconstruct(&self, x: &Matrix) -> Matrix {
        self.decoder.forward(&self.encoder.forward(x))
    }

    /// Mean squared error per element, without penalties.
    pub fn reconstruction_mse(&self, x: &Matrix) -> f64 {
        let r = self.reconstruct(x);
        let n = x.as_slice().len().max(1) as f64;
        r.as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n
    }

    /// Objective `(1/B) Σ ½‖x̂ − x‖² + λ/2 ‖W‖² + β Σ KL(ρ ‖ ρ̂_j)` and its
    /// gradient (encoder first).
    pub fn loss_and_gradient(&self, x: &Matrix, reg: &Regularization) -> (f64, [LayerGrad; 2]) {
        let batch = x.rows() as f64;
        let h = self.encoder.forward(x);
        let out = self.decoder.forward(&h);

        let mut loss = 0.0;
        let mut delta = Matrix::zeros(out.rows(), out.cols());
        for ((d, &y), &t) in delta
            .as_mut_slice()
            .iter_mut()
            .zip(out.as_slice())
            .zip(x.as_slice())
        {
            let e = y - t;
            loss += 0.5 * e * e;
            *d = e / batch;
        }
        loss /= batch;
        activation_backward(self.decoder.activation, &out, &mut delta);

        let mut g_enc = LayerGrad::zeros_like(&self.encoder);
        let mut g_dec = LayerGrad::zeros_like(&self.decoder);
        let mut dh = self
            .decoder
            .backward(&h, &delta, &mut g_dec, true)
            .expect("input gradient requested");

        if let Some(sp) = reg.sparsity {
            let hidden = h.cols();
            let mut rho = alloc::vec![0.0; hidden];
            for r in 0..h.rows() {
                for (acc, &v) in rho.iter_mut().zip(h.row(r)) {
                    *acc += v;
                }
            }
            let mut coeff = Vec::with_capacity(hidden);
            for r in rho.iter_mut() {
                *r = (*r / batch).clamp(RHO_EPS, 1.0 - RHO_EPS);
                loss += sp.weight * kl_divergence(sp.target, *r);
                coeff.push(sp.weight * (-sp.target / *r + (1.0 - sp.target) / (1.0 - *r)) / batch);
            }
            for r in 0..dh.rows() {
                for (d, c) in dh.row_mut(r).iter_mut().zip(&coeff) {
                    *d += c;
                }
            }
        }

        activation_backward(self.encoder.activation, &h, &mut dh);
        self.encoder.backward(x, &dh, &mut g_enc, false);
        loss += self.encoder.apply_decay(reg.weight_decay, &mut g_enc);
        loss += self.decoder.apply_decay(reg.weight_decay, &mut g_dec);
        (loss, [g_enc, g_dec])
    }

    pub fn loss(&self, x: &Matrix, reg: &Regularization) -> f64 {
        self.loss_and_gradient(x, reg).0
    }
}

/// Unsupervised training of `ae` to reconstruct the rows of `data`.
pub fn pretrain_autoencoder(
    ae: Autoencoder,
    data: &Matrix,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<Autoencoder>, NeuralError> {
    if data.cols() != ae.input_dim() {
        return Err(NeuralError::DimensionMismatch {
            expected: ae.input_dim(),
            actual: data.cols(),
        });
    }
    let mut ae = ae;
    let reg = cfg.regularization();
    let mut opt = Momentum::new([&ae.encoder, &ae.decoder], cfg);
    let trace = run_epochs(data.rows(), cfg, |idx| {
        let batch = data.select_rows(idx);
        let (loss, grads) = ae.loss_and_gradient(&batch, &reg);
        if loss.is_finite() {
            opt.step([&mut ae.encoder, &mut ae.decoder], &grads);
        }
        loss
    })?;
    Ok(TrainOutcome {
        model: ae,
        loss_trace: trace,
    })
}
