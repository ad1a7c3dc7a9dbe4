//! Forest and SVM behaviour on small hand-checkable data sets.

use puree_core::classifiers::{
    argmax_decision, median_gamma, predict_batch, predict_classifier, rbf_kernel,
    train_random_forest, train_svm, ClassifierError, DecisionTree, ForestConfig, KernelSpec,
    Machine, Node, RandomForest, SvmConfig, TreeConfig,
};
use puree_core::matrix::Matrix;
use puree_core::rng::seeded;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn xor() -> (Matrix, Vec<usize>) {
    let x = Matrix::from_vec(4, 2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
    (x, vec![0, 1, 1, 0])
}

/// Gaussian blobs around `classes` random centres in `dims` dimensions.
fn blobs(
    seed: u64,
    per_class: usize,
    classes: usize,
    dims: usize,
    spread: f64,
) -> (Matrix, Vec<usize>) {
    blobs_with_noise(seed, seed, per_class, classes, dims, spread)
}

fn blobs_with_noise(
    seed: u64,
    noise_seed: u64,
    per_class: usize,
    classes: usize,
    dims: usize,
    spread: f64,
) -> (Matrix, Vec<usize>) {
    let mut rng = seeded(seed);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dims).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    if noise_seed != seed {
        rng = seeded(noise_seed);
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * classes {
        let k = i % classes;
        for c in &centres[k] {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(c + spread * z);
        }
        labels.push(k);
    }
    (Matrix::from_vec(labels.len(), dims, data).unwrap(), labels)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn xor_single_tree_fits_exactly() {
    let (x, y) = xor();
    let tree = DecisionTree::fit(&x, &y, 2, &TreeConfig::default(), &mut seeded(3)).unwrap();
    assert!(tree.depth() >= 2);
    assert_eq!(predict_batch(&tree, &x).unwrap(), y);
}

#[test]
fn constant_labels_give_constant_forest() {
    let (x, _) = blobs(1, 10, 3, 4, 1.0);
    let y = vec![2; x.rows()];
    let forest = train_random_forest(&x, &y, 5, &ForestConfig::default(), 9).unwrap();
    let probe = [100.0, -100.0, 0.0, 7.0];
    assert_eq!(predict_classifier(&forest, &probe).unwrap(), 2);
    assert!(predict_batch(&forest, &x).unwrap().iter().all(|&p| p == 2));
}

#[test]
fn forest_is_deterministic_per_seed() {
    let (x, y) = blobs(2, 15, 5, 8, 1.5);
    let a = train_random_forest(&x, &y, 5, &ForestConfig::default(), 4).unwrap();
    let b = train_random_forest(&x, &y, 5, &ForestConfig::default(), 4).unwrap();
    let c = train_random_forest(&x, &y, 5, &ForestConfig::default(), 5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.trees().len(), 10);
}

#[test]
fn identical_trees_vote_like_one() {
    let (x, y) = blobs(3, 10, 3, 2, 1.0);
    let tree = DecisionTree::fit(&x, &y, 3, &TreeConfig::default(), &mut seeded(0)).unwrap();
    let forest = RandomForest::from_trees(vec![tree.clone(); 7]).unwrap();
    assert_eq!(
        predict_batch(&forest, &x).unwrap(),
        predict_batch(&tree, &x).unwrap()
    );
}

#[test]
fn hand_built_vote() {
    let leaf = |class| DecisionTree::from_nodes(vec![Node::Leaf { class }], 1, 5).unwrap();
    let forest = RandomForest::from_trees(vec![leaf(0), leaf(0), leaf(1)]).unwrap();
    assert_eq!(forest.votes(&[0.0]), vec![2, 1, 0, 0, 0]);
    assert_eq!(predict_classifier(&forest, &[0.0]).unwrap(), 0);
    let tie = RandomForest::from_trees(vec![leaf(3), leaf(1)]).unwrap();
    assert_eq!(predict_classifier(&tie, &[0.0]).unwrap(), 1);
}

#[test]
fn forest_at_least_as_accurate_as_single_tree() {
    // Training accuracy of the ensemble against a single bootstrap tree
    // from the same seed family.
    for seed in 0..20 {
        let (x, y) = blobs(seed, 12, 5, 6, 2.0);
        let cfg = ForestConfig::default();
        let forest = train_random_forest(&x, &y, 5, &cfg, seed).unwrap();
        let single =
            train_random_forest(&x, &y, 5, &ForestConfig { n_trees: 1, ..cfg }, seed).unwrap();
        let fa = accuracy(&predict_batch(&forest, &x).unwrap(), &y);
        let sa = accuracy(&predict_batch(&single, &x).unwrap(), &y);
        assert!(fa >= sa, "seed {seed}: forest {fa} < tree {sa}");
    }
}

#[test]
fn dimension_checks() {
    let (x, y) = xor();
    let forest = train_random_forest(&x, &y, 2, &ForestConfig::default(), 0).unwrap();
    assert_eq!(
        predict_classifier(&forest, &[0.0]),
        Err(ClassifierError::DimensionMismatch {
            expected: 2,
            actual: 1
        })
    );
    let svm = train_svm(&x, &y, 2, &SvmConfig::linear()).unwrap();
    assert!(predict_classifier(&svm, &[0.0, 1.0, 2.0]).is_err());
    assert!(train_random_forest(&x, &[0, 1, 2, 0], 2, &ForestConfig::default(), 0).is_err());
}

#[test]
fn non_finite_features_rejected() {
    let mut x = xor().0;
    x.set(2, 1, f64::INFINITY);
    assert_eq!(
        train_svm(&x, &[0, 1, 1, 0], 2, &SvmConfig::rbf()),
        Err(ClassifierError::NonFinite { row: 2, col: 1 })
    );
}

#[test]
fn two_separable_points_get_signed_margins() {
    let x = Matrix::from_vec(2, 2, vec![-1.0, 0.5, 1.0, 0.5]).unwrap();
    let y = [0, 1];
    for cfg in [SvmConfig::linear(), SvmConfig::rbf()] {
        let model = train_svm(&x, &y, 2, &cfg).unwrap();
        let f0 = model.decision_values(x.row(0)).unwrap();
        let f1 = model.decision_values(x.row(1)).unwrap();
        assert!(f0[0] > 0.0 && f0[1] < 0.0, "{:?} {f0:?}", cfg.kernel);
        assert!(f1[1] > 0.0 && f1[0] < 0.0, "{:?} {f1:?}", cfg.kernel);
    }
}

#[test]
fn rbf_kernel_identities() {
    let mut rng = seeded(8);
    for _ in 0..100 {
        let a: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = rng.random_range(0.01..2.0);
        assert_eq!(rbf_kernel(g, &a, &a), 1.0);
        assert_eq!(rbf_kernel(g, &a, &b), rbf_kernel(g, &b, &a));
        assert!(rbf_kernel(g, &a, &b) <= 1.0);
    }
}

#[test]
fn median_heuristic_on_fixed_points() {
    // Ten points on a line at 0..9: 45 pairwise distances, d appears 10 − d
    // times, so the 23rd smallest (the median) is 3.
    let x = Matrix::from_vec(10, 1, (0..10).map(f64::from).collect()).unwrap();
    let mut d: Vec<f64> = Vec::new();
    for i in 0..10 {
        for j in i + 1..10 {
            d.push((j - i) as f64);
        }
    }
    d.sort_by(f64::total_cmp);
    assert_eq!(d[22], 3.0);
    assert_eq!(median_gamma(&x), 1.0 / 18.0);

    // The model records the gamma computed on standardized data.
    let y: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
    let model = train_svm(&x, &y, 2, &SvmConfig::rbf()).unwrap();
    let z = model.standardizer.transform(&x);
    assert_eq!(
        model.kernel,
        puree_core::classifiers::Kernel::Rbf {
            gamma: median_gamma(&z)
        }
    );
}

#[test]
fn svm_argmax_example() {
    assert_eq!(argmax_decision(&[-1.0, 2.0, 0.5, 0.0, -3.0]), 1);
}

#[test]
fn svm_objective_improves_on_zero_machine() {
    let (x, y) = blobs(6, 20, 5, 6, 1.5);
    for cfg in [SvmConfig::linear(), SvmConfig::rbf()] {
        let model = train_svm(&x, &y, 5, &cfg).unwrap();
        assert_eq!(model.machines.len(), 5);
        for obj in model.objectives(&x, &y).unwrap() {
            assert!(obj.is_finite() && obj <= 1.0, "{:?}: {obj}", cfg.kernel);
        }
    }
}

#[test]
fn svms_separate_blobs() {
    let (x, y) = blobs(10, 30, 5, 4, 0.6);
    let (xt, yt) = blobs_with_noise(10, 99, 30, 5, 4, 0.6);
    for cfg in [SvmConfig::linear(), SvmConfig::rbf()] {
        let model = train_svm(&x, &y, 5, &cfg).unwrap();
        let acc = accuracy(&predict_batch(&model, &xt).unwrap(), &yt);
        assert!(acc > 0.9, "{:?}: {acc}", cfg.kernel);
        assert_eq!(model, train_svm(&x, &y, 5, &cfg).unwrap());
    }
}

#[test]
fn rbf_support_rows_are_standardized_training_rows() {
    let (x, y) = blobs(12, 8, 3, 3, 1.0);
    let model = train_svm(&x, &y, 3, &SvmConfig::rbf()).unwrap();
    let z = model.standardizer.transform(&x);
    assert!(model.support.rows() > 0);
    for s in model.support.row_iter() {
        assert!(z.row_iter().any(|r| r == s));
    }
    for m in &model.machines {
        match m {
            Machine::Kernel { coefficients } => {
                assert_eq!(coefficients.len(), model.support.rows())
            }
            Machine::Linear { .. } => panic!("expected kernel machine"),
        }
    }
    let cfg = SvmConfig {
        kernel: KernelSpec::Rbf { gamma: Some(0.5) },
        ..SvmConfig::rbf()
    };
    assert_eq!(
        train_svm(&x, &y, 3, &cfg).unwrap().kernel,
        puree_core::classifiers::Kernel::Rbf { gamma: 0.5 }
    );
}
