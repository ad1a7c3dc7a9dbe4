use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use puree::config::{ExperimentConfig, Profile};
use puree::dataset::{generate_synthetic_dataset, LoadedDataset};
use puree::driver::{
    load_networks, pretrain_networks, save_networks, FeatureKind, FoldResult, Method, Prepared,
};
use puree::experiment::{evaluate_into, evaluate_saved, run_full_experiment, RunLayout};
use puree::features_io::write_feature_csv;
use puree::model::{save_model, ModelPayload, ModelSidecar, FORMAT_VERSION};
use puree::report::{ExperimentReport, REPORT_FILE};
use puree::spectra::SpectraSet;

#[derive(Parser)]
#[command(
    name = "puree",
    version,
    about = "Estimate purée dilution from synthetic images"
)]
struct Cli {
    /// Experiment configuration (JSON). Fields override the chosen profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Profile used when no configuration file is given.
    #[arg(long, global = true, value_enum, default_value = "desk")]
    profile: ProfileArg,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Auto,
    Hand,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Render the synthetic dataset and its manifest.
    Synth,
    /// Export handcrafted features of every patch as CSV.
    Features {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long = "csv")]
        csv_out: Option<PathBuf>,
    },
    /// Pretrain the general networks on all patches.
    Pretrain {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Number of networks; defaults to the configuration.
        #[arg(long)]
        nets: Option<usize>,
    },
    /// Cross-validate one method on one flavor and save the fold models.
    Train {
        #[arg(long)]
        flavor: String,
        /// softmax, random-forest, svm-linear or svm-rbf.
        #[arg(long)]
        method: String,
        #[arg(long, value_enum, default_value = "auto")]
        features: FeaturesArg,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Cross-validate methods on every flavor and write the report.
    Evaluate {
        /// Run all methods (the default when no --method is given).
        #[arg(long)]
        all: bool,
        /// Method labels such as `softmax/auto` or `svm-rbf/hand`.
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Print a saved report.
    Report {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Synthesize, pretrain, evaluate and report in one go.
    Run,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::profile_with_env(match cli.profile {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Full => Profile::Full,
        })?,
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    let layout = RunLayout::new(&cfg.output_dir);
    match cli.command {
        Command::Synth => {
            let spectra = SpectraSet::load(&cfg.spectra, &cfg.flavors)?;
            let m = generate_synthetic_dataset(&cfg, &spectra, &layout.dataset_dir())?;
            println!(
                "{} patches from {} samples in {}",
                m.records.len(),
                m.samples,
                layout.dataset_dir().display()
            );
        }
        Command::Features { manifest, csv_out } => {
            let data = LoadedDataset::open(&manifest.unwrap_or_else(|| layout.manifest()))?;
            let out = csv_out.unwrap_or_else(|| cfg.output_dir.join("features.csv"));
            write_feature_csv(&out, &data)?;
            println!("wrote {}", out.display());
        }
        Command::Pretrain { manifest, nets } => {
            let mut cfg = cfg.clone();
            if let Some(n) = nets {
                if n == 0 {
                    bail!("--nets must be at least 1");
                }
                cfg.general_networks = n;
            }
            let data = LoadedDataset::open(&manifest.unwrap_or_else(|| layout.manifest()))?;
            let trained = pretrain_networks(&cfg, &data.vectors())?;
            save_networks(&cfg, &layout.models_dir(), &trained)?;
            println!(
                "saved {} general networks in {}",
                trained.len(),
                layout.models_dir().display()
            );
        }
        Command::Train {
            flavor,
            method,
            features,
            manifest,
        } => {
            let kind = match features {
                FeaturesArg::Auto => FeatureKind::Auto,
                FeaturesArg::Hand => FeatureKind::Hand,
            };
            let Some(method) = Method::from_parts(&method, kind) else {
                bail!("no method `{method}` with {kind:?} features");
            };
            let mut cfg = cfg.clone();
            cfg.flavors = vec![flavor.clone()];
            let data = LoadedDataset::open(&manifest.unwrap_or_else(|| layout.manifest()))?;
            let (nets, summaries) = load_networks(&layout.models_dir(), cfg.general_networks)
                .context("loading pretrained networks; run `puree pretrain` first")?;
            let prepared = Prepared::new(&cfg, &data, nets)?;
            let dir = layout.fold_models_dir(&flavor, method);
            std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
            let mut report = ExperimentReport::new(cfg.clone());
            report.pretraining = summaries;
            let mut save = |r: &FoldResult, payload: ModelPayload| {
                let sidecar = ModelSidecar {
                    format_version: FORMAT_VERSION,
                    kind: payload.kind().to_string(),
                    dims: cfg.net_dims().to_vec(),
                    seed: cfg.master_seed,
                    config: serde_json::json!({ "method": method, "flavor": r.flavor, "test_position": r.test_position, "rep": r.rep }),
                };
                save_model(
                    &dir.join(format!("pos{}_rep{}.bin", r.test_position, r.rep)),
                    &payload,
                    &sidecar,
                )
            };
            evaluate_into(&mut report, &prepared, &[method], &mut save)?;
            report.summarize();
            let out = dir.join(REPORT_FILE);
            std::fs::write(&out, report.to_json()).with_context(|| out.display().to_string())?;
            if let Some(s) = report.summary(method, Some(&flavor)) {
                println!(
                    "{flavor} {method}: accuracy {:.3} ± {:.3}",
                    s.accuracy.mean.unwrap_or(f64::NAN),
                    s.accuracy.sd.unwrap_or(f64::NAN)
                );
            }
            println!("models and fold results in {}", dir.display());
        }
        Command::Evaluate {
            all,
            methods,
            manifest,
        } => {
            let methods: Vec<Method> = if all || methods.is_empty() {
                Method::ALL.to_vec()
            } else {
                methods
                    .iter()
                    .map(|m| m.parse())
                    .collect::<Result<_, String>>()
                    .map_err(anyhow::Error::msg)?
            };
            let report = evaluate_saved(
                &cfg,
                &manifest.unwrap_or_else(|| layout.manifest()),
                &layout.models_dir(),
                &methods,
            )?;
            print!("{}", report.text_table());
        }
        Command::Report { input, format } => {
            let report =
                ExperimentReport::load(&input.unwrap_or_else(|| cfg.output_dir.join(REPORT_FILE)))?;
            match format {
                ReportFormat::Text => print!("{}", report.text_table()),
                ReportFormat::Csv => print!("{}", report.table_csv()),
                ReportFormat::Json => println!("{}", report.to_json()),
            }
            if let Some(f) = &report.failure {
                bail!("report is partial: {} stage failed: {}", f.stage, f.message);
            }
        }
        Command::Run => {
            let report = run_full_experiment(&cfg)?;
            print!("{}", report.text_table());
            if report.leakage.total_leaked() != 0 {
                bail!("fold hygiene violated: {:?}", report.leakage.leaked);
            }
        }
    }
    Ok(())
}
