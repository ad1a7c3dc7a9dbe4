//! End-to-end orchestration and the on-disk layout of an experiment
//! directory.

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::dataset::{generate_synthetic_dataset, LoadedDataset, MANIFEST_FILE};
use crate::driver::{load_networks, pretrain_networks, save_networks, Method, Prepared};
use crate::error::{PureeError, Result};
use crate::model::ModelPayload;
use crate::report::{DatasetSummary, ExperimentReport, Failure};
use crate::spectra::SpectraSet;

/// Directory layout below `output_dir`.
#[derive(Clone, Debug)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.root.join("dataset")
    }

    pub fn manifest(&self) -> PathBuf {
        self.dataset_dir().join(MANIFEST_FILE)
    }

    pub fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn fold_models_dir(&self, flavor: &str, method: Method) -> PathBuf {
        self.models_dir()
            .join(flavor)
            .join(method.label().replace('/', "-"))
    }
}

fn dataset_summary(d: &LoadedDataset) -> DatasetSummary {
    DatasetSummary {
        records: d.manifest.records.len(),
        samples: d.manifest.samples,
        patches_per_sample: d.manifest.patches_per_sample,
        patch_height: d.manifest.patch_height,
        patch_width: d.manifest.patch_width,
    }
}

/// Evaluates `methods` on every configured flavor and records the results
/// in `report`. Stops at the first error, leaving completed folds in place.
pub fn evaluate_into(
    report: &mut ExperimentReport,
    prepared: &Prepared<'_>,
    methods: &[Method],
    sink: &mut dyn FnMut(&crate::driver::FoldResult, ModelPayload) -> Result<()>,
) -> Result<()> {
    let flavors = report.config.flavors.clone();
    for flavor in &flavors {
        for &method in methods {
            log::info!("evaluating {method} on {flavor}");
            let mut leakage = Default::default();
            let res = prepared.evaluate(flavor, method, &mut leakage, sink);
            report.leakage.merge(&leakage);
            report.folds.extend(res?);
        }
    }
    Ok(())
}

fn discard(_: &crate::driver::FoldResult, _: ModelPayload) -> Result<()> {
    Ok(())
}

/// Synthesizes the dataset, pretrains and saves the general networks,
/// reloads them, evaluates all methods and writes the report into
/// `cfg.output_dir`.
///
/// On failure a partial report naming the failed stage is still written
/// and [`PureeError::RunFailed`] is returned.
pub fn run_full_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let layout = RunLayout::new(&cfg.output_dir);
    let mut report = ExperimentReport::new(cfg.clone());
    let mut stage = "spectra";
    let outcome = (|| -> Result<()> {
        let spectra = SpectraSet::load(&cfg.spectra, &cfg.flavors)?;
        stage = "synthesis";
        generate_synthetic_dataset(cfg, &spectra, &layout.dataset_dir())?;
        let data = LoadedDataset::open(&layout.manifest())?;
        report.dataset = Some(dataset_summary(&data));
        stage = "pretraining";
        let trained = pretrain_networks(cfg, &data.vectors())?;
        save_networks(cfg, &layout.models_dir(), &trained)?;
        drop(trained);
        let (nets, summaries) = load_networks(&layout.models_dir(), cfg.general_networks)?;
        report.pretraining = summaries;
        stage = "evaluation";
        let prepared = Prepared::new(cfg, &data, nets)?;
        evaluate_into(&mut report, &prepared, &Method::ALL, &mut discard)
    })();
    finish(report, &layout.root, stage, outcome)
}

/// Evaluation from a previously synthesized dataset and saved networks.
pub fn evaluate_saved(
    cfg: &ExperimentConfig,
    manifest: &Path,
    models_dir: &Path,
    methods: &[Method],
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg.clone());
    let mut stage = "loading";
    let outcome = (|| -> Result<()> {
        let data = LoadedDataset::open(manifest)?;
        report.dataset = Some(dataset_summary(&data));
        let (nets, summaries) = load_networks(models_dir, cfg.general_networks)?;
        report.pretraining = summaries;
        stage = "evaluation";
        let prepared = Prepared::new(cfg, &data, nets)?;
        evaluate_into(&mut report, &prepared, methods, &mut discard)
    })();
    finish(report, &cfg.output_dir, stage, outcome)
}

fn finish(
    mut report: ExperimentReport,
    dir: &Path,
    stage: &str,
    outcome: Result<()>,
) -> Result<ExperimentReport> {
    report.summarize();
    match outcome {
        Ok(()) => {
            report.write_all(dir)?;
            Ok(report)
        }
        Err(source) => {
            report.failure = Some(Failure {
                stage: stage.to_string(),
                message: source.to_string(),
            });
            report.write_all(dir)?;
            Err(PureeError::RunFailed {
                stage: stage.to_string(),
                report_dir: dir.to_path_buf(),
                source: Box::new(source),
            })
        }
    }
}
