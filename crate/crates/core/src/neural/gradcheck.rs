use alloc::vec::Vec;

use super::{
    Autoencoder, ClassificationTask, DenseLayer, LayerGrad, Matrix, ReconstructionTask, StackedNet,
};

/// A model whose flat parameter vector has an analytic gradient for some
/// task.
pub trait Differentiable {
    type Task;

    fn parameters(&self) -> Vec<f64>;
    /// Overwrites parameters in the order produced by [`parameters`](Self::parameters).
    fn set_parameters(&mut self, params: &[f64]);
    fn loss(&self, task: &Self::Task) -> f64;
    fn gradient(&self, task: &Self::Task) -> Vec<f64>;
}

/// Inputs and targets for a quadratic loss `(1/B) Σ ½‖f(x) − t‖²` on a
/// single layer.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTask {
    pub inputs: Matrix,
    pub targets: Matrix,
}

fn flatten(grads: &[LayerGrad]) -> Vec<f64> {
    let mut out = Vec::new();
    for g in grads {
        g.flatten_into(&mut out);
    }
    out
}

fn load(layers: &mut [&mut DenseLayer], params: &[f64]) {
    let mut offset = 0;
    for l in layers.iter_mut() {
        offset += l.load_from(&params[offset..]);
    }
    assert_eq!(offset, params.len(), "parameter vector length");
}

impl DenseLayer {
    fn regression_loss_and_gradient(&self, task: &RegressionTask) -> (f64, LayerGrad) {
        let out = self.forward(&task.inputs);
        let batch = task.inputs.rows() as f64;
        let mut loss = 0.0;
        let mut delta = Matrix::zeros(out.rows(), out.cols());
        for ((d, &y), &t) in delta
            .as_mut_slice()
            .iter_mut()
            .zip(out.as_slice())
            .zip(task.targets.as_slice())
        {
            let e = y - t;
            loss += 0.5 * e * e;
            *d = e / batch;
        }
        super::layer::activation_backward(self.activation, &out, &mut delta);
        let mut g = LayerGrad::zeros_like(self);
        self.backward(&task.inputs, &delta, &mut g, false);
        (loss / batch, g)
    }
}

impl Differentiable for DenseLayer {
    type Task = RegressionTask;

    fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        self.flatten_into(&mut p);
        p
    }

    fn set_parameters(&mut self, params: &[f64]) {
        load(&mut [self], params);
    }

    fn loss(&self, task: &RegressionTask) -> f64 {
        self.regression_loss_and_gradient(task).0
    }

    fn gradient(&self, task: &RegressionTask) -> Vec<f64> {
        flatten(&[self.regression_loss_and_gradient(task).1])
    }
}

impl Differentiable for Autoencoder {
    type Task = ReconstructionTask;

    fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::new();
        self.encoder.flatten_into(&mut p);
        self.decoder.flatten_into(&mut p);
        p
    }

    fn set_parameters(&mut self, params: &[f64]) {
        load(&mut [&mut self.encoder, &mut self.decoder], params);
    }

    fn loss(&self, task: &ReconstructionTask) -> f64 {
        Autoencoder::loss(self, &task.inputs, &task.regularization)
    }

    fn gradient(&self, task: &ReconstructionTask) -> Vec<f64> {
        flatten(&self.loss_and_gradient(&task.inputs, &task.regularization).1)
    }
}

impl Differentiable for StackedNet {
    type Task = ClassificationTask;

    fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for l in self.layers() {
            l.flatten_into(&mut p);
        }
        p
    }

    fn set_parameters(&mut self, params: &[f64]) {
        let mut layers: Vec<&mut DenseLayer> = self.layers_mut().iter_mut().collect();
        load(&mut layers, params);
    }

    fn loss(&self, task: &ClassificationTask) -> f64 {
        self.loss_and_gradient(&task.inputs, &task.labels, task.weight_decay)
            .0
    }

    fn gradient(&self, task: &ClassificationTask) -> Vec<f64> {
        flatten(
            &self
                .loss_and_gradient(&task.inputs, &task.labels, task.weight_decay)
                .1,
        )
    }
}

/// Worst disagreement between analytic and central-difference gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub worst_parameter: usize,
    pub parameters: usize,
}

/// Below this magnitude both gradients count as zero and the relative
/// error is measured against it instead.
const RELATIVE_FLOOR: f64 = 1e-7;

/// Compares `model.gradient(task)` with `(L(θ+ε) − L(θ−ε)) / 2ε` for every
/// parameter, using `|a − n| / max(|a|, |n|, 1e-7)`.
pub fn gradient_check<M: Differentiable + Clone>(
    model: &M,
    task: &M::Task,
    eps: f64,
) -> GradientCheck {
    let analytic = model.gradient(task);
    let base = model.parameters();
    assert_eq!(analytic.len(), base.len(), "gradient length");
    let mut probe = model.clone();
    let mut params = base.clone();
    let mut worst = GradientCheck {
        max_relative_error: 0.0,
        worst_parameter: 0,
        parameters: base.len(),
    };
    for i in 0..base.len() {
        params[i] = base[i] + eps;
        probe.set_parameters(&params);
        let up = probe.loss(task);
        params[i] = base[i] - eps;
        probe.set_parameters(&params);
        let down = probe.loss(task);
        params[i] = base[i];
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
        if rel > worst.max_relative_error {
            worst.max_relative_error = rel;
            worst.worst_parameter = i;
        }
    }
    worst
}
