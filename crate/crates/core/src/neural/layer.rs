use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, NeuralError};
use crate::stats::{axpy, dot, dot4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Sigmoid,
    Softmax,
}

impl Activation {
    pub fn tag(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Sigmoid => 1,
            Activation::Softmax => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// In-place numerically stable softmax of one row.
pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Fully connected layer `a = f(W x + b)` with `W` stored out × in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Gradient with the same shapes as a [`DenseLayer`]'s parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        LayerGrad {
            weights: vec![0.0; layer.weights.as_slice().len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub(crate) fn flatten_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.bias);
    }
}

impl DenseLayer {
    pub fn new(
        weights: Matrix,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, NeuralError> {
        if weights.rows() != bias.len() || weights.rows() == 0 || weights.cols() == 0 {
            return Err(NeuralError::InvalidLayer {
                index: 0,
                reason: "weight rows must equal bias length and be non-empty",
            });
        }
        if !weights.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(NeuralError::InvalidLayer {
                index: 0,
                reason: "non-finite parameter",
            });
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn xavier<R: Rng>(
        rng: &mut R,
        input: usize,
        output: usize,
        activation: Activation,
    ) -> Self {
        let bound = libm::sqrt(6.0 / (input + output) as f64);
        let data = (0..input * output)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        DenseLayer {
            weights: Matrix::from_vec(output, input, data).expect("shape"),
            bias: vec![0.0; output],
            activation,
        }
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }

    /// Activated outputs for a batch (rows of `x`).
    pub fn forward(&self, x: &Matrix) -> Matrix {
        debug_assert_eq!(x.cols(), self.input_dim());
        let (batch, out) = (x.rows(), self.output_dim());
        let mut z = Matrix::zeros(batch, out);
        // Four input rows share each pass over a weight row.
        let mut r = 0;
        while r + 4 <= batch {
            let xs = [x.row(r), x.row(r + 1), x.row(r + 2), x.row(r + 3)];
            for o in 0..out {
                let d = dot4(self.weights.row(o), xs);
                for (k, v) in d.iter().enumerate() {
                    z.set(r + k, o, v + self.bias[o]);
                }
            }
            r += 4;
        }
        for r in r..batch {
            for o in 0..out {
                z.set(r, o, dot(self.weights.row(o), x.row(r)) + self.bias[o]);
            }
        }
        match self.activation {
            Activation::Identity => {}
            Activation::Sigmoid => z.as_mut_slice().iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Softmax => {
                for r in 0..batch {
                    softmax_in_place(z.row_mut(r));
                }
            }
        }
        z
    }

    /// Accumulates parameter gradients given `delta = ∂L/∂z` for the batch
    /// whose inputs were `x`, and returns `∂L/∂x` when asked.
    pub(crate) fn backward(
        &self,
        x: &Matrix,
        delta: &Matrix,
        grad: &mut LayerGrad,
        want_input: bool,
    ) -> Option<Matrix> {
        let (batch, out, inp) = (x.rows(), self.output_dim(), self.input_dim());
        for o in 0..out {
            let gw = &mut grad.weights[o * inp..(o + 1) * inp];
            let mut gb = 0.0;
            for r in 0..batch {
                let d = delta.get(r, o);
                if d != 0.0 {
                    axpy(d, x.row(r), gw);
                }
                gb += d;
            }
            grad.bias[o] += gb;
        }
        if !want_input {
            return None;
        }
        let mut dx = Matrix::zeros(batch, inp);
        for o in 0..out {
            let w = self.weights.row(o);
            for r in 0..batch {
                let d = delta.get(r, o);
                if d != 0.0 {
                    axpy(d, w, dx.row_mut(r));
                }
            }
        }
        Some(dx)
    }

    /// Adds `λ/2 ‖W‖²` to the loss and `λ W` to the gradient.
    pub(crate) fn apply_decay(&self, decay: f64, grad: &mut LayerGrad) -> f64 {
        if decay == 0.0 {
            return 0.0;
        }
        axpy(decay, self.weights.as_slice(), &mut grad.weights);
        0.5 * decay * self.weights.sum_of_squares()
    }

    pub(crate) fn flatten_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.weights.as_slice());
        out.extend_from_slice(&self.bias);
    }

    /// Reads parameters back from `params`, returning how many were used.
    pub(crate) fn load_from(&mut self, params: &[f64]) -> usize {
        let nw = self.weights.as_slice().len();
        let nb = self.bias.len();
        self.weights.as_mut_slice().copy_from_slice(&params[..nw]);
        self.bias.copy_from_slice(&params[nw..nw + nb]);
        nw + nb
    }
}

/// Converts `∂L/∂a` into `∂L/∂z` for an elementwise activation.
pub(crate) fn activation_backward(act: Activation, a: &Matrix, da: &mut Matrix) {
    match act {
        Activation::Identity => {}
        Activation::Sigmoid => {
            for (d, &y) in da.as_mut_slice().iter_mut().zip(a.as_slice()) {
                *d *= y * (1.0 - y);
            }
        }
        Activation::Softmax => unreachable!("softmax is only used as the output layer"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut r = [1.0, 2.0, 1000.0];
        softmax_in_place(&mut r);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut two = [1.0, 2.0];
        softmax_in_place(&mut two);
        assert!((two[0] - 0.268_941_421_369_995).abs() < 1e-12);
    }

    #[test]
    fn xavier_bounds() {
        let l = DenseLayer::xavier(&mut seeded(1), 30, 20, Activation::Sigmoid);
        let bound = libm::sqrt(6.0 / 50.0);
        assert!(l.weights.as_slice().iter().all(|w| w.abs() < bound));
        assert!(l.bias.iter().all(|&b| b == 0.0));
        assert_eq!((l.output_dim(), l.input_dim()), (20, 30));
    }

    #[test]
    fn forward_matches_hand_computation() {
        let w = Matrix::from_vec(2, 3, vec![1.0, 0.0, -1.0, 0.5, 0.5, 0.5]).unwrap();
        let l = DenseLayer::new(w, vec![0.1, -0.2], Activation::Identity).unwrap();
        let x = Matrix::from_vec(1, 3, vec![2.0, 4.0, 6.0]).unwrap();
        let y = l.forward(&x);
        assert!((y.get(0, 0) - (-4.0 + 0.1)).abs() < 1e-15);
        assert!((y.get(0, 1) - (6.0 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn constructor_checks() {
        let w = Matrix::from_vec(2, 1, vec![1.0, f64::NAN]).unwrap();
        assert!(DenseLayer::new(w, vec![0.0, 0.0], Activation::Sigmoid).is_err());
        let w = Matrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(DenseLayer::new(w, vec![0.0], Activation::Sigmoid).is_err());
    }
}
