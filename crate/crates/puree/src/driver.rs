//! Experiment stages: pretraining the general networks and the
//! position-fold evaluation of every method on every flavor.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use puree_core::classifiers::{predict_batch, train_random_forest, train_svm, Kernel, SvmConfig};
use puree_core::eval::{majority_vote, position_folds, ConfusionMatrix, MetricsSummary};
use puree_core::matrix::Matrix;
use puree_core::neural::{finetune_stack, GeneralNetwork, TrainConfig};
use puree_core::NUM_CLASSES;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dataset::LoadedDataset;
use crate::error::{io_err, PureeError, Result};
use crate::features_io::handcrafted_matrix;
use crate::model::{load_model, save_model, ModelPayload, ModelSidecar};
use crate::seeds::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Second-level autoencoder codes.
    Auto,
    /// Color histogram and texture features.
    Hand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Fine-tuned stacked autoencoder with a softmax output.
    Softmax,
    AutoForest,
    AutoSvmLinear,
    AutoSvmRbf,
    HandForest,
    HandSvmLinear,
    HandSvmRbf,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Softmax,
        Method::AutoForest,
        Method::AutoSvmLinear,
        Method::AutoSvmRbf,
        Method::HandForest,
        Method::HandSvmLinear,
        Method::HandSvmRbf,
    ];

    pub fn features(self) -> FeatureKind {
        match self {
            Method::Softmax | Method::AutoForest | Method::AutoSvmLinear | Method::AutoSvmRbf => {
                FeatureKind::Auto
            }
            _ => FeatureKind::Hand,
        }
    }

    /// Classifier name without the feature source.
    pub fn classifier(self) -> &'static str {
        match self {
            Method::Softmax => "softmax",
            Method::AutoForest | Method::HandForest => "random-forest",
            Method::AutoSvmLinear | Method::HandSvmLinear => "svm-linear",
            Method::AutoSvmRbf | Method::HandSvmRbf => "svm-rbf",
        }
    }

    pub fn from_parts(classifier: &str, features: FeatureKind) -> Option<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.classifier() == classifier && m.features() == features)
    }

    pub fn label(self) -> String {
        let f = match self.features() {
            FeatureKind::Auto => "auto",
            FeatureKind::Hand => "hand",
        };
        format!("{}/{f}", self.classifier())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Outcome of one method on one fold for one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub flavor: String,
    pub method: Method,
    pub rep: usize,
    pub test_position: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsSummary,
    /// Kernel width used by RBF machines.
    pub gamma: Option<f64>,
}

/// Supervised training rows examined per stage, and how many of them came
/// from the fold's test position. Every `leaked` count must be zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageCounters {
    pub checked: BTreeMap<String, u64>,
    pub leaked: BTreeMap<String, u64>,
}

impl LeakageCounters {
    fn record(&mut self, stage: &str, rows: &[usize], positions: &[u32], test_position: u32) {
        let bad = rows
            .iter()
            .filter(|&&i| positions[i] == test_position)
            .count() as u64;
        *self.checked.entry(stage.to_string()).or_default() += rows.len() as u64;
        *self.leaked.entry(stage.to_string()).or_default() += bad;
    }

    pub fn total_leaked(&self) -> u64 {
        self.leaked.values().sum()
    }

    pub fn merge(&mut self, other: &LeakageCounters) {
        for (k, v) in &other.checked {
            *self.checked.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.leaked {
            *self.leaked.entry(k.clone()).or_default() += v;
        }
    }
}

/// Final losses of one pretrained general network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainSummary {
    pub net: usize,
    pub seed: u64,
    pub ae1_loss_trace: Vec<f64>,
    pub ae2_loss_trace: Vec<f64>,
}

fn seeded_cfg(base: &TrainConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        ..base.clone()
    }
}

/// Trains `cfg.general_networks` independently seeded networks on every
/// patch vector without labels.
pub fn pretrain_networks(
    cfg: &ExperimentConfig,
    vectors: &Matrix,
) -> Result<Vec<(GeneralNetwork, PretrainSummary)>> {
    let [input, c1, c2, _] = cfg.net_dims();
    if vectors.cols() != input {
        return Err(PureeError::Config(format!(
            "dataset vectors have {} values, configuration expects {input}",
            vectors.cols()
        )));
    }
    let mut out = Vec::with_capacity(cfg.general_networks);
    for k in 0..cfg.general_networks {
        let seed = derive_seed(cfg.master_seed, &format!("pretrain/net{k}"));
        let cfg1 = seeded_cfg(
            &cfg.pretrain[0],
            derive_seed(cfg.master_seed, &format!("pretrain/net{k}/ae1")),
        );
        let cfg2 = seeded_cfg(
            &cfg.pretrain[1],
            derive_seed(cfg.master_seed, &format!("pretrain/net{k}/ae2")),
        );
        let (net, traces) =
            GeneralNetwork::init(seed, input, c1, c2).pretrain(vectors, &cfg1, &cfg2)?;
        log::info!(
            "general network {k}: reconstruction loss {:.4} / {:.4}",
            traces.ae1.last().copied().unwrap_or(f64::NAN),
            traces.ae2.last().copied().unwrap_or(f64::NAN)
        );
        out.push((
            net,
            PretrainSummary {
                net: k,
                seed,
                ae1_loss_trace: traces.ae1,
                ae2_loss_trace: traces.ae2,
            },
        ));
    }
    Ok(out)
}

pub fn network_path(models_dir: &Path, k: usize) -> PathBuf {
    models_dir.join(format!("general_{k}.bin"))
}

pub fn save_networks(
    cfg: &ExperimentConfig,
    models_dir: &Path,
    nets: &[(GeneralNetwork, PretrainSummary)],
) -> Result<()> {
    std::fs::create_dir_all(models_dir).map_err(io_err(models_dir))?;
    for (net, summary) in nets {
        let sidecar = ModelSidecar {
            format_version: crate::model::FORMAT_VERSION,
            kind: "general-network".into(),
            dims: cfg.net_dims()[..3].to_vec(),
            seed: summary.seed,
            config: serde_json::to_value(&cfg.pretrain).expect("config serializes"),
        };
        save_model(
            &network_path(models_dir, summary.net),
            &ModelPayload::General(net.clone()),
            &sidecar,
        )?;
    }
    let path = models_dir.join("pretraining.json");
    let summaries: Vec<&PretrainSummary> = nets.iter().map(|(_, s)| s).collect();
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&summaries).expect("serializes"),
    )
    .map_err(io_err(&path))
}

/// Reads back the networks written by [`save_networks`].
pub fn load_networks(
    models_dir: &Path,
    count: usize,
) -> Result<(Vec<GeneralNetwork>, Vec<PretrainSummary>)> {
    let mut nets = Vec::with_capacity(count);
    for k in 0..count {
        let path = network_path(models_dir, k);
        match load_model(&path)? {
            ModelPayload::General(n) => nets.push(n),
            other => {
                return Err(crate::error::format_err(
                    &path,
                    format!("expected a general network, found {}", other.kind()),
                ))
            }
        }
    }
    let path = models_dir.join("pretraining.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let summaries =
        serde_json::from_str(&text).map_err(|source| PureeError::Json { path, source })?;
    Ok((nets, summaries))
}

/// Everything the evaluation stage reads, computed once.
pub struct Prepared<'a> {
    pub cfg: &'a ExperimentConfig,
    pub data: &'a LoadedDataset,
    pub vectors: Matrix,
    pub hand: Matrix,
    pub nets: Vec<GeneralNetwork>,
    /// Second-level codes of every patch, per network.
    pub codes: Vec<Matrix>,
    positions: Vec<u32>,
    labels: Vec<usize>,
}

impl<'a> Prepared<'a> {
    pub fn new(
        cfg: &'a ExperimentConfig,
        data: &'a LoadedDataset,
        nets: Vec<GeneralNetwork>,
    ) -> Result<Self> {
        if nets.len() != cfg.general_networks {
            return Err(PureeError::Config(format!(
                "{} general networks loaded, configuration asks for {}",
                nets.len(),
                cfg.general_networks
            )));
        }
        let vectors = data.vectors();
        let hand = handcrafted_matrix(data)?;
        let codes = nets.iter().map(|n| n.encode(&vectors)).collect();
        Ok(Prepared {
            cfg,
            data,
            vectors,
            hand,
            nets,
            codes,
            positions: data.manifest.records.iter().map(|r| r.position).collect(),
            labels: data.manifest.records.iter().map(|r| r.class).collect(),
        })
    }

    fn seed(&self, what: &str, flavor: &str, method: Method, position: u32, rep: usize) -> u64 {
        derive_seed(
            self.cfg.master_seed,
            &format!("{what}/{}/{flavor}/pos{position}/rep{rep}", method.label()),
        )
    }

    fn features(&self, method: Method, rep: usize) -> &Matrix {
        match method.features() {
            FeatureKind::Auto => &self.codes[rep],
            FeatureKind::Hand => &self.hand,
        }
    }

    /// Runs every fold and repetition of `method` on `flavor`. `sink`
    /// receives each trained model.
    pub fn evaluate(
        &self,
        flavor: &str,
        method: Method,
        leakage: &mut LeakageCounters,
        sink: &mut dyn FnMut(&FoldResult, ModelPayload) -> Result<()>,
    ) -> Result<Vec<FoldResult>> {
        let rows = self.data.manifest.flavor_indices(flavor);
        if rows.is_empty() {
            return Err(PureeError::Config(format!(
                "flavor `{flavor}` is not in the dataset"
            )));
        }
        let local_positions: Vec<u32> = rows.iter().map(|&i| self.positions[i]).collect();
        let plan = position_folds(&local_positions)?;
        let mut results = Vec::new();
        for fold in &plan.folds {
            let (train_local, test_local) = fold.split(&local_positions);
            let train: Vec<usize> = train_local.iter().map(|&i| rows[i]).collect();
            let test: Vec<usize> = test_local.iter().map(|&i| rows[i]).collect();
            for rep in 0..self.cfg.general_networks {
                let (predictions, payload, gamma) = self.fit_predict(
                    flavor,
                    method,
                    fold.test_position,
                    rep,
                    &train,
                    &test,
                    leakage,
                )?;
                let truths: Vec<usize> = test.iter().map(|&i| self.labels[i]).collect();
                let (pred, truth) = if self.cfg.aggregate_subimages {
                    self.vote_by_sample(&test, &predictions)
                } else {
                    (predictions, truths)
                };
                let confusion = ConfusionMatrix::from_predictions(&pred, &truth, NUM_CLASSES)?;
                let metrics = confusion.summary()?;
                let result = FoldResult {
                    flavor: flavor.to_string(),
                    method,
                    rep,
                    test_position: fold.test_position,
                    n_train: train.len(),
                    n_test: test.len(),
                    confusion,
                    metrics,
                    gamma,
                };
                log::debug!(
                    "{flavor} {method} fold {} rep {rep}: accuracy {:.3}",
                    fold.test_position,
                    result.metrics.accuracy
                );
                sink(&result, payload)?;
                results.push(result);
            }
        }
        Ok(results)
    }

    /// One prediction per subimage, the mode of its patch predictions.
    fn vote_by_sample(&self, test: &[usize], predictions: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut groups: BTreeMap<(String, usize, u32), Vec<usize>> = BTreeMap::new();
        for (&i, &p) in test.iter().zip(predictions) {
            groups
                .entry(self.data.manifest.records[i].sample_key())
                .or_default()
                .push(p);
        }
        groups
            .into_iter()
            .map(|((_, class, _), preds)| {
                (
                    majority_vote(&preds, NUM_CLASSES).expect("non-empty group"),
                    class,
                )
            })
            .unzip()
    }

    #[allow(clippy::too_many_arguments)]
    fn fit_predict(
        &self,
        flavor: &str,
        method: Method,
        position: u32,
        rep: usize,
        train: &[usize],
        test: &[usize],
        leakage: &mut LeakageCounters,
    ) -> Result<(Vec<usize>, ModelPayload, Option<f64>)> {
        let train_labels: Vec<usize> = train.iter().map(|&i| self.labels[i]).collect();
        let seed = |what: &str| self.seed(what, flavor, method, position, rep);
        match method {
            Method::Softmax => {
                leakage.record("finetune", train, &self.positions, position);
                let net = self.nets[rep].stack(NUM_CLASSES, seed("head-init"));
                let mut ft = self.cfg.finetune.clone();
                ft.head.seed = seed("head-sgd");
                ft.full.seed = seed("full-sgd");
                let out =
                    finetune_stack(net, &self.vectors.select_rows(train), &train_labels, &ft)?;
                let pred = out.model.predict(&self.vectors.select_rows(test));
                Ok((pred, ModelPayload::Net(out.model), None))
            }
            Method::AutoForest | Method::HandForest => {
                leakage.record("forest", train, &self.positions, position);
                let x = self.features(method, rep);
                let forest = train_random_forest(
                    &x.select_rows(train),
                    &train_labels,
                    NUM_CLASSES,
                    &self.cfg.forest,
                    seed("forest"),
                )?;
                let pred = predict_batch(&forest, &x.select_rows(test))?;
                Ok((pred, ModelPayload::Forest(forest), None))
            }
            _ => {
                leakage.record("svm", train, &self.positions, position);
                let x = self.features(method, rep);
                let base: &SvmConfig = match method {
                    Method::AutoSvmLinear | Method::HandSvmLinear => &self.cfg.svm_linear,
                    _ => &self.cfg.svm_rbf,
                };
                let svm_cfg = SvmConfig {
                    seed: seed("svm"),
                    ..base.clone()
                };
                let model = train_svm(&x.select_rows(train), &train_labels, NUM_CLASSES, &svm_cfg)?;
                let pred = predict_batch(&model, &x.select_rows(test))?;
                let gamma = match model.kernel {
                    Kernel::Rbf { gamma } => Some(gamma),
                    Kernel::Linear => None,
                };
                Ok((pred, ModelPayload::Svm(model), gamma))
            }
        }
    }
}
