//! Experiment report: per-fold results, mean ± sd summaries and the CSV
//! tables derived from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use puree_core::eval::aggregate;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::driver::{FoldResult, LeakageCounters, Method, PretrainSummary};
use crate::error::{io_err, PureeError, Result};

pub const REPORT_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table1.csv";
pub const PER_FLAVOR_FILE: &str = "per_flavor.csv";

/// Mean and sample sd; `None` when no defined value was available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let m = aggregate(values);
        let finite = |v: f64| v.is_finite().then_some(v);
        Stat {
            mean: finite(m.mean),
            sd: finite(m.sd),
            n: m.n,
        }
    }

    fn cells(&self) -> [String; 2] {
        let f = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
        [f(self.mean), f(self.sd)]
    }
}

/// One row of a results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// `None` for the row aggregated over flavors.
    pub flavor: Option<String>,
    /// Macro one-vs-rest sensitivity.
    pub sensitivity: Stat,
    /// Macro one-vs-rest specificity.
    pub specificity: Stat,
    /// Multiclass accuracy, trace over total.
    pub accuracy: Stat,
    /// Macro accuracy of the collapsed one-vs-rest tables.
    pub ovr_accuracy: Stat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub records: usize,
    pub samples: usize,
    pub patches_per_sample: usize,
    pub patch_height: usize,
    pub patch_width: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub dataset: Option<DatasetSummary>,
    /// Evaluation conventions in force for this run.
    pub conventions: Vec<String>,
    pub pretraining: Vec<PretrainSummary>,
    pub folds: Vec<FoldResult>,
    pub per_flavor: Vec<MethodSummary>,
    pub overall: Vec<MethodSummary>,
    pub leakage: LeakageCounters,
    pub failure: Option<Failure>,
}

pub fn conventions(cfg: &ExperimentConfig) -> Vec<String> {
    let mut c = vec![
        "folds: six, each holding out one acquisition position".to_string(),
        "pretraining: general networks are trained once on unlabeled patches of every flavor and position, then fine-tuned per flavor and fold".to_string(),
        "specificity: one-vs-rest TN / (TN + FP), macro-averaged over classes present in the fold".to_string(),
        "accuracy: trace / total of the multiclass confusion matrix; ovr_accuracy is the macro one-vs-rest accuracy".to_string(),
        "per-flavor rows: mean ± sample sd over folds × repetitions; overall rows: mean ± sample sd over flavor means".to_string(),
        format!("repetitions: {} (one per general network, and seeds for the baselines)", cfg.general_networks),
    ];
    c.push(if cfg.aggregate_subimages {
        "scoring unit: subimage, by majority vote of its patches".to_string()
    } else {
        "scoring unit: patch".to_string()
    });
    c
}

fn summarize(method: Method, flavor: Option<String>, rows: &[&FoldResult]) -> MethodSummary {
    let col = |f: &dyn Fn(&FoldResult) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
    MethodSummary {
        method,
        flavor,
        sensitivity: Stat::of(&col(&|r| r.metrics.macro_sensitivity)),
        specificity: Stat::of(&col(&|r| r.metrics.macro_specificity)),
        accuracy: Stat::of(&col(&|r| r.metrics.accuracy)),
        ovr_accuracy: Stat::of(&col(&|r| r.metrics.macro_accuracy)),
    }
}

/// Per-flavor summaries, in configured flavor order then method order.
pub fn per_flavor_summaries(flavors: &[String], folds: &[FoldResult]) -> Vec<MethodSummary> {
    let mut out = Vec::new();
    for flavor in flavors {
        for method in Method::ALL {
            let rows: Vec<&FoldResult> = folds
                .iter()
                .filter(|r| &r.flavor == flavor && r.method == method)
                .collect();
            if !rows.is_empty() {
                out.push(summarize(method, Some(flavor.clone()), &rows));
            }
        }
    }
    out
}

/// Overall rows: mean ± sd across the per-flavor means.
pub fn overall_summaries(per_flavor: &[MethodSummary]) -> Vec<MethodSummary> {
    let mut by_method: BTreeMap<Method, Vec<&MethodSummary>> = BTreeMap::new();
    for s in per_flavor {
        by_method.entry(s.method).or_default().push(s);
    }
    Method::ALL
        .into_iter()
        .filter_map(|m| {
            let rows = by_method.get(&m)?;
            let col = |f: &dyn Fn(&MethodSummary) -> Stat| {
                let v: Vec<f64> = rows.iter().map(|r| f(r).mean.unwrap_or(f64::NAN)).collect();
                Stat::of(&v)
            };
            Some(MethodSummary {
                method: m,
                flavor: None,
                sensitivity: col(&|r| r.sensitivity),
                specificity: col(&|r| r.specificity),
                accuracy: col(&|r| r.accuracy),
                ovr_accuracy: col(&|r| r.ovr_accuracy),
            })
        })
        .collect()
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentReport {
            format_version: REPORT_VERSION,
            conventions: conventions(&config),
            config,
            dataset: None,
            pretraining: Vec::new(),
            folds: Vec::new(),
            per_flavor: Vec::new(),
            overall: Vec::new(),
            leakage: LeakageCounters::default(),
            failure: None,
        }
    }

    /// Recomputes the summary rows from `folds`.
    pub fn summarize(&mut self) {
        self.per_flavor = per_flavor_summaries(&self.config.flavors, &self.folds);
        self.overall = overall_summaries(&self.per_flavor);
    }

    pub fn summary(&self, method: Method, flavor: Option<&str>) -> Option<&MethodSummary> {
        let rows = if flavor.is_some() {
            &self.per_flavor
        } else {
            &self.overall
        };
        rows.iter()
            .find(|s| s.method == method && s.flavor.as_deref() == flavor)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| PureeError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Method rows aggregated over flavors.
    pub fn table_csv(&self) -> String {
        render_csv(&self.overall, false)
    }

    pub fn per_flavor_csv(&self) -> String {
        render_csv(&self.per_flavor, true)
    }

    /// Writes the JSON report and both CSV tables into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, body) in [
            (REPORT_FILE, self.to_json()),
            (TABLE_FILE, self.table_csv()),
            (PER_FLAVOR_FILE, self.per_flavor_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io_err(&path))?;
        }
        Ok(())
    }

    /// Fixed-width text rendering of the overall rows.
    pub fn text_table(&self) -> String {
        let mut s = String::new();
        let pm = |st: &Stat| match (st.mean, st.sd) {
            (Some(m), Some(sd)) => format!("{m:.3} ± {sd:.3}"),
            _ => "n/a".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<20} {:>15} {:>15} {:>15}",
            "method", "sensitivity", "specificity", "accuracy"
        );
        for r in &self.overall {
            let _ = writeln!(
                s,
                "{:<20} {:>15} {:>15} {:>15}",
                r.method.label(),
                pm(&r.sensitivity),
                pm(&r.specificity),
                pm(&r.accuracy)
            );
        }
        s
    }
}

fn render_csv(rows: &[MethodSummary], with_flavor: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = Vec::new();
    if with_flavor {
        header.push("flavor");
    }
    header.extend([
        "classifier",
        "features",
        "sens_mean",
        "sens_sd",
        "spec_mean",
        "spec_sd",
        "acc_mean",
        "acc_sd",
        "ovr_acc_mean",
        "ovr_acc_sd",
    ]);
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec: Vec<String> = Vec::new();
        if with_flavor {
            rec.push(r.flavor.clone().unwrap_or_default());
        }
        rec.push(r.method.classifier().to_string());
        rec.push(
            serde_json::to_value(r.method.features())
                .unwrap()
                .as_str()
                .unwrap()
                .to_string(),
        );
        for st in [&r.sensitivity, &r.specificity, &r.accuracy, &r.ovr_accuracy] {
            rec.extend(st.cells());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use puree_core::eval::ConfusionMatrix;

    fn fold(flavor: &str, method: Method, preds: &[usize], truth: &[usize]) -> FoldResult {
        let confusion = ConfusionMatrix::from_predictions(preds, truth, 5).unwrap();
        FoldResult {
            flavor: flavor.into(),
            method,
            rep: 0,
            test_position: 1,
            n_train: 0,
            n_test: preds.len(),
            metrics: confusion.summary().unwrap(),
            confusion,
            gamma: None,
        }
    }

    #[test]
    fn overall_is_mean_of_flavor_means() {
        let t = [0, 1, 2, 3, 4];
        let folds = vec![
            fold("a", Method::Softmax, &[0, 1, 2, 3, 4], &t),
            fold("a", Method::Softmax, &[0, 1, 2, 3, 0], &t),
            fold("b", Method::Softmax, &[0, 0, 0, 0, 0], &t),
        ];
        let per = per_flavor_summaries(&["a".into(), "b".into()], &folds);
        assert_eq!(per.len(), 2);
        assert!((per[0].accuracy.mean.unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(per[1].accuracy.sd, Some(0.0));
        let all = overall_summaries(&per);
        assert!((all[0].accuracy.mean.unwrap() - 0.55).abs() < 1e-12);
        let sd = ((0.35f64.powi(2) * 2.0) / 1.0).sqrt();
        assert!((all[0].accuracy.sd.unwrap() - sd).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new(ExperimentConfig::desk());
        r.folds = vec![fold(
            "blueberry",
            Method::HandSvmRbf,
            &[0, 1, 2, 3, 4],
            &[0, 1, 2, 3, 4],
        )];
        r.summarize();
        let table = r.table_csv();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "classifier,features,sens_mean,sens_sd,spec_mean,spec_sd,acc_mean,acc_sd,ovr_acc_mean,ovr_acc_sd");
        assert_eq!(
            lines[1],
            "svm-rbf,hand,1.000000,0.000000,1.000000,0.000000,1.000000,0.000000,1.000000,0.000000"
        );
        assert!(r
            .per_flavor_csv()
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("blueberry,svm-rbf,hand"));
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn undefined_stats_are_empty_cells() {
        let s = Stat::of(&[f64::NAN]);
        assert_eq!(
            s,
            Stat {
                mean: None,
                sd: None,
                n: 0
            }
        );
        assert_eq!(s.cells(), [String::new(), String::new()]);
    }
}
