//! Analytic gradients against central finite differences on toy models.

use puree_core::neural::{
    gradient_check, init_stack, Activation, Autoencoder, ClassificationTask, DenseLayer, Matrix,
    ReconstructionTask, RegressionTask,
};
use puree_core::neural::{Differentiable, GeneralNetwork, Regularization, SparsityPenalty};
use puree_core::rng::seeded;
use rand::Rng;

fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
    let mut rng = seeded(seed);
    let data = (0..rows * cols)
        .map(|_| rng.random_range(0.0..1.0))
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

#[test]
fn autoencoder_5_3_5() {
    let ae = Autoencoder::init(11, 5, 3);
    for reg in [
        Regularization::default(),
        Regularization {
            weight_decay: 1e-3,
            sparsity: None,
        },
        Regularization {
            weight_decay: 1e-3,
            sparsity: Some(SparsityPenalty {
                target: 0.1,
                weight: 0.5,
            }),
        },
    ] {
        let task = ReconstructionTask {
            inputs: random_matrix(3, 7, 5),
            regularization: reg,
        };
        let check = gradient_check(&ae, &task, 1e-4);
        assert_eq!(check.parameters, 2 * 15 + 3 + 5);
        assert!(check.max_relative_error < 1e-5, "{check:?}");
    }
}

#[test]
fn stack_6_4_3_2() {
    for seed in 0..5 {
        let net = init_stack(seed, &[6, 4, 3, 2]).unwrap();
        let task = ClassificationTask {
            inputs: random_matrix(seed + 100, 9, 6),
            labels: (0..9).map(|i| i % 2).collect(),
            weight_decay: 1e-3,
        };
        let check = gradient_check(&net, &task, 1e-4);
        assert_eq!(check.parameters, 24 + 4 + 12 + 3 + 6 + 2);
        assert!(check.max_relative_error < 1e-5, "{check:?}");
    }
}

#[test]
fn stacked_from_pretrained_encoders() {
    let general = GeneralNetwork::init(5, 6, 4, 3);
    let net = general.stack(2, 9);
    let task = ClassificationTask {
        inputs: random_matrix(1, 5, 6),
        labels: vec![0, 1, 1, 0, 1],
        weight_decay: 0.0,
    };
    let check = gradient_check(&net, &task, 1e-4);
    assert!(check.max_relative_error < 1e-5, "{check:?}");
}

#[test]
fn linear_layer_is_exact() {
    let mut rng = seeded(4);
    let layer = DenseLayer::xavier(&mut rng, 4, 3, Activation::Identity);
    let task = RegressionTask {
        inputs: random_matrix(8, 6, 4),
        targets: random_matrix(9, 6, 3),
    };
    let check = gradient_check(&layer, &task, 1e-4);
    assert!(check.max_relative_error < 1e-8, "{check:?}");
}

#[test]
fn zero_input_kills_weight_gradient() {
    let mut rng = seeded(2);
    let layer = DenseLayer::xavier(&mut rng, 4, 2, Activation::Sigmoid);
    let task = RegressionTask {
        inputs: Matrix::zeros(3, 4),
        targets: Matrix::from_vec(3, 2, vec![0.0, 1.0, 1.0, 0.0, 0.0, 1.0]).unwrap(),
    };
    let grad = layer.gradient(&task);
    let (weights, bias) = grad.split_at(8);
    assert!(weights.iter().all(|&g| g == 0.0));
    assert!(bias.iter().any(|&g| g != 0.0));

    let ae = Autoencoder::init(3, 4, 2);
    let task = ReconstructionTask {
        inputs: Matrix::zeros(2, 4),
        regularization: Regularization::default(),
    };
    let grad = ae.gradient(&task);
    assert!(grad[..8].iter().all(|&g| g == 0.0));
}

#[test]
fn parameters_round_trip() {
    let mut net = init_stack(1, &[6, 4, 3, 2]).unwrap();
    let p: Vec<f64> = net.parameters().iter().map(|v| v * 2.0).collect();
    net.set_parameters(&p);
    assert_eq!(net.parameters(), p);
}
