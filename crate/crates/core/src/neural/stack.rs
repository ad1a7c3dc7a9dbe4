use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layer::activation_backward;
use super::optim::{run_epochs, Momentum};
use super::{
    pretrain_autoencoder, Activation, Autoencoder, DenseLayer, FinetuneConfig, LayerGrad, Matrix,
    NeuralError, TrainConfig,
};
use crate::rng::{mix, seeded};

/// Sigmoid hidden layers followed by a softmax output layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedNet {
    layers: Vec<DenseLayer>,
}

/// Labeled inputs for cross-entropy training.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationTask {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
    pub weight_decay: f64,
}

/// Random initial stack for `dims = [input, code1, code2, classes]`.
pub fn init_stack(seed: u64, dims: &[usize]) -> Result<StackedNet, NeuralError> {
    if dims.len() != 4 || dims.contains(&0) {
        return Err(NeuralError::InvalidDims(dims.to_vec()));
    }
    let mut rng = seeded(seed);
    let last = dims.len() - 2;
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let act = if i == last {
                Activation::Softmax
            } else {
                Activation::Sigmoid
            };
            DenseLayer::xavier(&mut rng, w[0], w[1], act)
        })
        .collect();
    Ok(StackedNet { layers })
}

impl StackedNet {
    /// Validates shapes and activations: consecutive dims chain, hidden
    /// layers are not softmax, and the last layer is softmax.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self, NeuralError> {
        let Some(last) = layers.last() else {
            return Err(NeuralError::InvalidDims(Vec::new()));
        };
        if last.activation != Activation::Softmax {
            return Err(NeuralError::InvalidLayer {
                index: layers.len() - 1,
                reason: "output layer must be softmax",
            });
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(NeuralError::InvalidLayer {
                    index: i + 1,
                    reason: "input width does not match previous output",
                });
            }
            if pair[0].activation == Activation::Softmax {
                return Err(NeuralError::InvalidLayer {
                    index: i,
                    reason: "softmax is only allowed in the output layer",
                });
            }
        }
        Ok(StackedNet { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<DenseLayer> {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(DenseLayer::output_dim));
        d
    }

    /// Output of the last hidden layer (the learned features).
    pub fn encode(&self, x: &Matrix) -> Matrix {
        let hidden = &self.layers[..self.layers.len() - 1];
        hidden.iter().fold(x.clone(), |a, l| l.forward(&a))
    }

    /// Class probabilities, one row per input row.
    pub fn probabilities(&self, x: &Matrix) -> Matrix {
        self.layers.iter().fold(x.clone(), |a, l| l.forward(&a))
    }

    /// Top-1 class per row; ties go to the lowest index.
    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        let p = self.probabilities(x);
        p.row_iter().map(argmax).collect()
    }

    fn check_task(&self, x: &Matrix, labels: &[usize]) -> Result<(), NeuralError> {
        if x.cols() != self.input_dim() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.cols(),
            });
        }
        if x.rows() != labels.len() {
            return Err(NeuralError::LabelCount {
                inputs: x.rows(),
                labels: labels.len(),
            });
        }
        let classes = self.num_classes();
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(NeuralError::InvalidLabel { label, classes });
        }
        Ok(())
    }

    /// Mean cross-entropy plus `λ/2 Σ ‖W‖²`, and the gradient of every
    /// layer. Labels must already be validated.
    pub fn loss_and_gradient(
        &self,
        x: &Matrix,
        labels: &[usize],
        decay: f64,
    ) -> (f64, Vec<LayerGrad>) {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for l in &self.layers {
            let next = l.forward(acts.last().unwrap());
            acts.push(next);
        }
        let probs = acts.last().unwrap();
        let batch = x.rows() as f64;
        let mut loss = 0.0;
        let mut delta = probs.clone();
        for (r, &y) in labels.iter().enumerate() {
            loss -= libm::log(probs.get(r, y).max(f64::MIN_POSITIVE));
            let row = delta.row_mut(r);
            row[y] -= 1.0;
            row.iter_mut().for_each(|v| *v /= batch);
        }
        loss /= batch;

        let mut grads: Vec<LayerGrad> = self.layers.iter().map(LayerGrad::zeros_like).collect();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let need_input = i > 0;
            let dx = layer.backward(&acts[i], &delta, &mut grads[i], need_input);
            loss += layer.apply_decay(decay, &mut grads[i]);
            if let Some(mut dx) = dx {
                activation_backward(self.layers[i - 1].activation, &acts[i], &mut dx);
                delta = dx;
            }
        }
        (loss, grads)
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Predicted class and class probabilities for one input vector.
pub fn predict_top1(net: &StackedNet, x: &[f64]) -> Result<(usize, Vec<f64>), NeuralError> {
    if x.len() != net.input_dim() {
        return Err(NeuralError::DimensionMismatch {
            expected: net.input_dim(),
            actual: x.len(),
        });
    }
    let m = Matrix::from_vec(1, x.len(), x.to_vec()).expect("single row");
    let p = net.probabilities(&m).into_vec();
    Ok((argmax(&p), p))
}

/// Loss traces from both fine-tuning phases.
#[derive(Clone, Debug, PartialEq)]
pub struct FinetuneOutcome {
    pub model: StackedNet,
    pub head_trace: Vec<f64>,
    pub full_trace: Vec<f64>,
}

/// Trains the softmax layer on frozen codes, then backpropagates through
/// the whole stack.
pub fn finetune_stack(
    net: StackedNet,
    inputs: &Matrix,
    labels: &[usize],
    cfg: &FinetuneConfig,
) -> Result<FinetuneOutcome, NeuralError> {
    net.check_task(inputs, labels)?;
    if inputs.rows() == 0 {
        return Err(NeuralError::EmptyData);
    }
    let mut layers = net.into_layers();

    let head_trace = if cfg.head.epochs > 0 {
        let codes = {
            let hidden = &layers[..layers.len() - 1];
            hidden.iter().fold(inputs.clone(), |a, l| l.forward(&a))
        };
        let mut head = StackedNet {
            layers: vec![layers.pop().unwrap()],
        };
        let trace = train_classifier(&mut head, &codes, labels, &cfg.head)?;
        layers.push(head.layers.pop().unwrap());
        trace
    } else {
        Vec::new()
    };

    let mut net = StackedNet { layers };
    let full_trace = if cfg.full.epochs > 0 {
        train_classifier(&mut net, inputs, labels, &cfg.full)?
    } else {
        Vec::new()
    };
    Ok(FinetuneOutcome {
        model: net,
        head_trace,
        full_trace,
    })
}

fn train_classifier(
    net: &mut StackedNet,
    x: &Matrix,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<f64>, NeuralError> {
    let mut opt = Momentum::new(net.layers.iter(), cfg);
    let mut batch_labels = Vec::with_capacity(cfg.batch_size);
    run_epochs(x.rows(), cfg, |idx| {
        let batch = x.select_rows(idx);
        batch_labels.clear();
        batch_labels.extend(idx.iter().map(|&i| labels[i]));
        let (loss, grads) = net.loss_and_gradient(&batch, &batch_labels, cfg.weight_decay);
        if loss.is_finite() {
            opt.step(net.layers.iter_mut(), &grads);
        }
        loss
    })
}

/// Two pretrained autoencoders shared across flavors before any labels
/// are seen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralNetwork {
    pub ae1: Autoencoder,
    pub ae2: Autoencoder,
}

/// Loss traces of both pretraining stages.
#[derive(Clone, Debug, PartialEq)]
pub struct PretrainTraces {
    pub ae1: Vec<f64>,
    pub ae2: Vec<f64>,
}

impl GeneralNetwork {
    /// Fresh autoencoders for `input → code1 → code2`.
    pub fn init(seed: u64, input: usize, code1: usize, code2: usize) -> Self {
        GeneralNetwork {
            ae1: Autoencoder::init(mix(seed, 1), input, code1),
            ae2: Autoencoder::init(mix(seed, 2), code1, code2),
        }
    }

    pub fn new(ae1: Autoencoder, ae2: Autoencoder) -> Result<Self, NeuralError> {
        if ae1.code_dim() != ae2.input_dim() {
            return Err(NeuralError::InvalidDims(vec![
                ae1.input_dim(),
                ae1.code_dim(),
                ae2.input_dim(),
                ae2.code_dim(),
            ]));
        }
        Ok(GeneralNetwork { ae1, ae2 })
    }

    /// Greedy layerwise pretraining: AE1 on `data`, then AE2 on AE1 codes.
    pub fn pretrain(
        self,
        data: &Matrix,
        cfg1: &TrainConfig,
        cfg2: &TrainConfig,
    ) -> Result<(Self, PretrainTraces), NeuralError> {
        let first = pretrain_autoencoder(self.ae1, data, cfg1)?;
        let codes = first.model.encode(data);
        let second = pretrain_autoencoder(self.ae2, &codes, cfg2)?;
        Ok((
            GeneralNetwork {
                ae1: first.model,
                ae2: second.model,
            },
            PretrainTraces {
                ae1: first.loss_trace,
                ae2: second.loss_trace,
            },
        ))
    }

    /// Second-level codes.
    pub fn encode(&self, x: &Matrix) -> Matrix {
        self.ae2.encode(&self.ae1.encode(x))
    }

    /// Both encoders topped with a fresh softmax layer.
    pub fn stack(&self, classes: usize, head_seed: u64) -> StackedNet {
        let head = DenseLayer::xavier(
            &mut seeded(head_seed),
            self.ae2.code_dim(),
            classes,
            Activation::Softmax,
        );
        StackedNet {
            layers: vec![self.ae1.encoder.clone(), self.ae2.encoder.clone(), head],
        }
    }
}
