//! Integration tests over the experiment pipeline and the CLI.

use std::path::Path;
use std::process::Command;

use puree::config::ExperimentConfig;
use puree::dataset::{synthesize, DatasetManifest};
use puree::driver::Method;
use puree::experiment::{evaluate_saved, run_full_experiment, RunLayout};
use puree::report::{ExperimentReport, REPORT_FILE};
use puree::spectra::SpectraSet;
use puree::PureeError;
use puree_core::imaging::PatchGridSpec;

fn small_config(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk();
    cfg.flavors = vec!["strawberry".into(), "chicken".into()];
    cfg.subimage_height = 20;
    cfg.subimage_width = 40;
    cfg.grid = PatchGridSpec::half_overlap(10, 20);
    cfg.general_networks = 2;
    cfg.code_dims = [12, 6];
    cfg.pretrain[0].epochs = 4;
    cfg.pretrain[0].learning_rate = 0.01;
    cfg.pretrain[1].epochs = 4;
    cfg.finetune.head.epochs = 8;
    cfg.finetune.full.epochs = 2;
    cfg.forest.n_trees = 5;
    cfg.svm_linear.epochs = 5;
    cfg.svm_rbf.epochs = 5;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

#[test]
fn staged_evaluation_matches_one_shot() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small_config(a.path());
    let one_shot = run_full_experiment(&cfg).unwrap();
    assert!(one_shot.failure.is_none());
    assert_eq!(one_shot.folds.len(), 2 * 7 * 6 * 2);

    let layout = RunLayout::new(a.path());
    let staged_cfg = ExperimentConfig {
        output_dir: b.path().to_path_buf(),
        ..cfg.clone()
    };
    let staged = evaluate_saved(
        &staged_cfg,
        &layout.manifest(),
        &layout.models_dir(),
        &Method::ALL,
    )
    .unwrap();
    assert_eq!(staged.folds, one_shot.folds);
    assert_eq!(staged.overall, one_shot.overall);
    assert_eq!(staged.pretraining, one_shot.pretraining);
    assert_eq!(staged.leakage.total_leaked(), 0);
    assert!(b.path().join(REPORT_FILE).exists());
}

#[test]
fn report_reflects_fold_structure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.flavors.truncate(1);
    cfg.aggregate_subimages = true;
    let report = run_full_experiment(&cfg).unwrap();
    for f in &report.folds {
        // One vote per dilution once patches are pooled per subimage.
        assert_eq!(f.confusion.total(), 5);
        assert_eq!(f.n_train, 5 * 5 * 9);
        assert_eq!(f.n_test, 5 * 9);
        assert_eq!(
            f.gamma.is_some(),
            matches!(f.method, Method::AutoSvmRbf | Method::HandSvmRbf)
        );
    }
    let reloaded = ExperimentReport::load(&dir.path().join(REPORT_FILE)).unwrap();
    assert_eq!(reloaded, report);
    for method in Method::ALL {
        let s = report.summary(method, None).unwrap();
        assert_eq!(s.accuracy.n, 1);
        assert_eq!(
            report
                .summary(method, Some("strawberry"))
                .unwrap()
                .accuracy
                .n,
            6 * 2
        );
    }
}

#[test]
fn failure_leaves_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.flavors.push("durian".into());
    let err = run_full_experiment(&cfg).unwrap_err();
    match &err {
        PureeError::RunFailed { stage, .. } => assert_eq!(stage, "spectra"),
        other => panic!("unexpected error {other}"),
    }
    let report = ExperimentReport::load(&dir.path().join(REPORT_FILE)).unwrap();
    let failure = report.failure.expect("failure recorded");
    assert_eq!(failure.stage, "spectra");
    assert!(failure.message.contains("durian"));
    assert!(report.folds.is_empty());
}

#[test]
fn full_flavor_set_yields_390_samples() {
    let mut cfg = ExperimentConfig::full();
    cfg.subimage_height = 8;
    cfg.subimage_width = 16;
    cfg.grid = PatchGridSpec::half_overlap(4, 8);
    let spectra = SpectraSet::load(&cfg.spectra, &cfg.flavors).unwrap();
    let records = synthesize(&cfg, &spectra).unwrap();
    assert_eq!(records.len(), 390 * 9);
    let mut samples: Vec<_> = records.iter().map(|(r, _)| r.sample_key()).collect();
    samples.dedup();
    assert_eq!(samples.len(), 390);
    for (r, _) in &records {
        assert_eq!(r.exposure_gain, cfg.exposure_gain(r.position));
    }
}

fn puree(dir: &Path, config: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_puree"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("PUREE_SEED")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cli_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let config = dir.path().join("config.json");
    std::fs::write(&config, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let synth = puree(dir.path(), &config, &["synth"]);
    assert!(synth.contains("540 patches from 60 samples"), "{synth}");
    let manifest = DatasetManifest::load(&RunLayout::new(dir.path()).manifest()).unwrap();
    assert_eq!(manifest.records.len(), 540);

    puree(dir.path(), &config, &["features"]);
    let features = std::fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert_eq!(features.lines().count(), 541);

    puree(dir.path(), &config, &["pretrain"]);
    let trained = puree(
        dir.path(),
        &config,
        &[
            "train",
            "--flavor",
            "chicken",
            "--method",
            "random-forest",
            "--features",
            "hand",
        ],
    );
    assert!(trained.contains("chicken random-forest/hand"), "{trained}");
    let fold_dir = dir.path().join("models/chicken/random-forest-hand");
    assert!(fold_dir.join("pos3_rep1.bin").exists());
    assert!(fold_dir.join("pos3_rep1.json").exists());

    let table = puree(
        dir.path(),
        &config,
        &["evaluate", "--method", "svm-linear/auto"],
    );
    assert!(table.contains("svm-linear/auto"));
    let csv = puree(dir.path(), &config, &["report", "--format", "csv"]);
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn cli_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, "{}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_puree"))
        .args([
            "--config",
            config.to_str().unwrap(),
            "evaluate",
            "--method",
            "knn/auto",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown method"));
}
