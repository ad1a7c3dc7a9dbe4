//! Experiment configuration: a single JSON file layered over a named
//! profile, with the master seed overridable from the environment.

use std::path::{Path, PathBuf};

use puree_core::classifiers::{ForestConfig, SvmConfig};
use puree_core::imaging::PatchGridSpec;
use puree_core::neural::{FinetuneConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{io_err, PureeError, Result};
use crate::spectra::{bundled_flavor_names, SpectraPaths};

/// Step size for the pixel-level autoencoder. Its loss sums over every
/// pixel value, so the generic pretraining rate overshoots.
pub const AE1_LEARNING_RATE: f64 = 0.001;

/// Environment variable replacing `master_seed`.
pub const SEED_ENV: &str = "PUREE_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Three flavors and short training; minutes on one CPU core.
    Desk,
    /// All bundled flavors with the full training schedule.
    Full,
}

/// Stochastic acquisition effects applied when rendering patches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub color_noise_sd: f64,
    pub texture_amplitude: f64,
    pub texture_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: Profile,
    pub master_seed: u64,
    pub flavors: Vec<String>,
    pub spectra: SpectraPaths,
    /// Optical path length used in the absorbance model.
    pub path_length: f64,
    pub subimage_height: usize,
    pub subimage_width: usize,
    pub grid: PatchGridSpec,
    /// Bicubic scale applied to each window before it is stored.
    pub downscale: f64,
    pub noise: NoiseConfig,
    /// Gain for position `p` is `exposure_gains[(p − 1) % len]`.
    pub exposure_gains: Vec<f64>,
    /// Number of independently seeded general networks; also the number of
    /// repetitions of every other method.
    pub general_networks: usize,
    /// Widths of the two code layers.
    pub code_dims: [usize; 2],
    /// Autoencoder 1 and 2 schedules. Seeds are derived from `master_seed`.
    pub pretrain: [TrainConfig; 2],
    pub finetune: FinetuneConfig,
    pub forest: ForestConfig,
    pub svm_linear: SvmConfig,
    pub svm_rbf: SvmConfig,
    /// Score one mode-voted prediction per sample instead of per patch.
    pub aggregate_subimages: bool,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn desk() -> Self {
        let ae1 = TrainConfig {
            epochs: 40,
            learning_rate: AE1_LEARNING_RATE,
            ..TrainConfig::pretrain_default()
        };
        let ae2 = TrainConfig {
            epochs: 20,
            ..TrainConfig::pretrain_default()
        };
        ExperimentConfig {
            profile: Profile::Desk,
            master_seed: 20_170_901,
            flavors: ["blueberry", "strawberry", "chicken"]
                .map(String::from)
                .to_vec(),
            spectra: SpectraPaths::default(),
            path_length: 3.0,
            subimage_height: 100,
            subimage_width: 200,
            grid: PatchGridSpec::half_overlap(50, 100),
            downscale: 0.5,
            noise: NoiseConfig {
                color_noise_sd: 0.02,
                texture_amplitude: 0.08,
                texture_scale: 6.0,
            },
            exposure_gains: vec![0.5, 1.0, 2.0],
            general_networks: 5,
            code_dims: [100, 50],
            pretrain: [ae1, ae2],
            finetune: FinetuneConfig {
                head: TrainConfig {
                    epochs: 100,
                    learning_rate: 0.1,
                    ..TrainConfig::finetune_default()
                },
                full: TrainConfig {
                    epochs: 20,
                    ..TrainConfig::finetune_default()
                },
            },
            forest: ForestConfig::default(),
            svm_linear: SvmConfig::linear(),
            svm_rbf: SvmConfig::rbf(),
            aggregate_subimages: false,
            output_dir: PathBuf::from("puree-out"),
        }
    }

    pub fn full() -> Self {
        ExperimentConfig {
            profile: Profile::Full,
            flavors: bundled_flavor_names()
                .into_iter()
                .map(String::from)
                .collect(),
            pretrain: [
                TrainConfig {
                    learning_rate: AE1_LEARNING_RATE,
                    ..TrainConfig::pretrain_default()
                },
                TrainConfig::pretrain_default(),
            ],
            finetune: FinetuneConfig {
                head: TrainConfig {
                    learning_rate: 0.1,
                    ..TrainConfig::finetune_default()
                },
                full: TrainConfig::finetune_default(),
            },
            ..Self::desk()
        }
    }

    pub fn for_profile(p: Profile) -> Self {
        match p {
            Profile::Desk => Self::desk(),
            Profile::Full => Self::full(),
        }
    }

    /// Parses a JSON document whose fields override the defaults of its
    /// `profile` (desk when absent). `seed_override` is the raw value of
    /// [`SEED_ENV`], if set.
    pub fn from_json_str(
        text: &str,
        seed_override: Option<&str>,
    ) -> std::result::Result<Self, String> {
        let user: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let Value::Object(_) = user else {
            return Err("top level must be a JSON object".into());
        };
        let profile = match user.get("profile") {
            Some(p) => serde_json::from_value(p.clone()).map_err(|e| format!("profile: {e}"))?,
            None => Profile::Desk,
        };
        let mut merged =
            serde_json::to_value(Self::for_profile(profile)).expect("config serializes");
        merge(&mut merged, user);
        let mut cfg: Self = serde_json::from_value(merged).map_err(|e| e.to_string())?;
        if let Some(s) = seed_override {
            cfg.master_seed = s
                .trim()
                .parse()
                .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, applying [`SEED_ENV`] from the environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let env = std::env::var(SEED_ENV).ok();
        Self::from_json_str(&text, env.as_deref())
            .map_err(|e| PureeError::Config(format!("{}: {e}", path.display())))
    }

    /// The profile defaults with [`SEED_ENV`] applied.
    pub fn profile_with_env(p: Profile) -> Result<Self> {
        let env = std::env::var(SEED_ENV).ok();
        Self::from_json_str(
            &format!("{{\"profile\": {}}}", serde_json::to_string(&p).unwrap()),
            env.as_deref(),
        )
        .map_err(PureeError::Config)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.flavors.is_empty() {
            return Err("at least one flavor is required".into());
        }
        let mut sorted = self.flavors.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.flavors.len() {
            return Err("flavor names must be unique".into());
        }
        if self.exposure_gains.is_empty()
            || self
                .exposure_gains
                .iter()
                .any(|g| !(g.is_finite() && *g > 0.0))
        {
            return Err("exposure_gains must be a non-empty list of positive numbers".into());
        }
        if self.general_networks == 0 {
            return Err("general_networks must be at least 1".into());
        }
        if !(self.path_length.is_finite() && self.path_length > 0.0) {
            return Err("path_length must be positive".into());
        }
        if self.code_dims.contains(&0) {
            return Err("code_dims must be positive".into());
        }
        let (h, w) = self.patch_shape()?;
        if h == 0 || w == 0 {
            return Err("patches vanish after downscaling".into());
        }
        for t in self
            .pretrain
            .iter()
            .chain([&self.finetune.head, &self.finetune.full])
        {
            t.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    /// Stored patch size after windowing and downscaling.
    pub fn patch_shape(&self) -> std::result::Result<(usize, usize), String> {
        let g = &self.grid;
        if g.window_h > self.subimage_height || g.window_w > self.subimage_width {
            return Err("grid window larger than subimage".into());
        }
        let scaled = |n: usize| {
            let v = n as f64 * self.downscale;
            let r = v.round();
            if (v - r).abs() < 1e-9 && self.downscale > 0.0 && self.downscale <= 1.0 {
                Ok(r as usize)
            } else {
                Err(format!(
                    "window side {n} does not scale to whole pixels by {}",
                    self.downscale
                ))
            }
        };
        Ok((scaled(g.window_h)?, scaled(g.window_w)?))
    }

    /// Layer widths of the stacked network.
    pub fn net_dims(&self) -> [usize; 4] {
        let (h, w) = self.patch_shape().expect("validated config");
        [
            3 * h * w,
            self.code_dims[0],
            self.code_dims[1],
            puree_core::NUM_CLASSES,
        ]
    }

    pub fn exposure_gain(&self, position: u32) -> f64 {
        self.exposure_gains[(position as usize - 1) % self.exposure_gains.len()]
    }
}

/// Recursively overlays `patch` onto `base`. Objects merge by key and
/// arrays of equal length merge elementwise; everything else replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (Value::Array(b), Value::Array(p)) if b.len() == p.len() => {
            for (slot, v) in b.iter_mut().zip(p) {
                merge(slot, v);
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_defaults() {
        let c = ExperimentConfig::desk();
        c.validate().unwrap();
        assert_eq!(c.patch_shape().unwrap(), (25, 50));
        assert_eq!(c.net_dims(), [3750, 100, 50, 5]);
        assert_eq!(c.flavors.len(), 3);
        assert_eq!(ExperimentConfig::full().flavors.len(), 13);
        assert_eq!(
            (1..=6).map(|p| c.exposure_gain(p)).collect::<Vec<_>>(),
            vec![0.5, 1.0, 2.0, 0.5, 1.0, 2.0]
        );
    }

    #[test]
    fn json_overrides_profile() {
        let c = ExperimentConfig::from_json_str(
            r#"{"profile": "full", "pretrain": [{"epochs": 3}, {"epochs": 4}]}"#,
            None,
        )
        .unwrap();
        assert_eq!(c.flavors.len(), 13);
        assert_eq!(c.pretrain[0].epochs, 3);
        assert_eq!(c.pretrain[1].batch_size, 32);
        let d = ExperimentConfig::from_json_str("{}", None).unwrap();
        assert_eq!(d, ExperimentConfig::desk());
    }

    #[test]
    fn env_seed_wins() {
        let c = ExperimentConfig::from_json_str(r#"{"master_seed": 5}"#, Some("99")).unwrap();
        assert_eq!(c.master_seed, 99);
        assert!(ExperimentConfig::from_json_str("{}", Some("abc")).is_err());
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(ExperimentConfig::from_json_str(r#"{"colour": 1}"#, None).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"flavors": []}"#, None).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"downscale": 0.33}"#, None).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"exposure_gains": [0]}"#, None).is_err());
        assert!(ExperimentConfig::from_json_str("[]", None).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::full();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&text, None).unwrap(), c);
    }
}
