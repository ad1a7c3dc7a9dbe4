//! Synthetic patch datasets: rendering, on-disk layout and the manifest
//! that indexes it.

use std::path::{Path, PathBuf};

use puree_core::imaging::{decompose_patches, downscale_bicubic, vectorize, PatchImage};
use puree_core::matrix::Matrix;
use puree_core::optics::{render_dilution_patch, DilutionParams, SynthNoiseParams};
use puree_core::{DILUTION_LEVELS, NUM_CLASSES};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{format_err, io_err, PureeError, Result};
use crate::formats::{read_raw, write_raw};
use crate::seeds::derive_seed;
use crate::spectra::SpectraSet;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
/// Acquisition positions per sample.
pub const POSITIONS: u32 = puree_core::eval::NUM_POSITIONS;

/// One stored patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub id: String,
    pub flavor: String,
    pub dilution: f64,
    pub class: usize,
    pub position: u32,
    pub exposure_gain: f64,
    /// Seed the subimage was rendered with.
    pub seed: u64,
    /// Window index within the subimage, row-major.
    pub patch_index: usize,
    /// Relative to the manifest directory.
    pub path: String,
}

impl PatchRecord {
    /// Key shared by every patch cut from the same subimage.
    pub fn sample_key(&self) -> (String, usize, u32) {
        (self.flavor.clone(), self.class, self.position)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub flavors: Vec<String>,
    pub patch_height: usize,
    pub patch_width: usize,
    pub patches_per_sample: usize,
    /// Flavor × dilution × position combinations.
    pub samples: usize,
    pub records: Vec<PatchRecord>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let m: Self = serde_json::from_str(&text).map_err(|source| PureeError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if m.format_version != MANIFEST_VERSION {
            return Err(format_err(
                path,
                format!("unsupported manifest version {}", m.format_version),
            ));
        }
        if m.records.len() != m.samples * m.patches_per_sample {
            return Err(format_err(
                path,
                "record count does not match samples × patches",
            ));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(io_err(path))
    }

    /// Indices of the records of one flavor, in manifest order.
    pub fn flavor_indices(&self, flavor: &str) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&i| self.records[i].flavor == flavor)
            .collect()
    }
}

/// Seed path of one rendered subimage.
pub fn sample_seed_path(flavor: &str, class: usize, position: u32) -> String {
    format!("synth/{flavor}/c{}/pos{position}", percent(class))
}

fn percent(class: usize) -> u32 {
    (DILUTION_LEVELS[class] * 100.0).round() as u32
}

/// Renders every flavor × dilution × position subimage, cuts it into
/// windows and downscales them. Records come out flavor-major, then
/// dilution, position and window.
pub fn synthesize(
    cfg: &ExperimentConfig,
    spectra: &SpectraSet,
) -> Result<Vec<(PatchRecord, PatchImage)>> {
    let mut out = Vec::new();
    for flavor in &cfg.flavors {
        let eps_p = spectra
            .flavors
            .get(flavor)
            .ok_or_else(|| PureeError::Config(format!("no spectrum loaded for `{flavor}`")))?;
        for (class, &level) in DILUTION_LEVELS.iter().enumerate() {
            let d = DilutionParams::new(level, cfg.path_length)?;
            for position in 1..=POSITIONS {
                let seed = derive_seed(cfg.master_seed, &sample_seed_path(flavor, class, position));
                let noise = SynthNoiseParams {
                    color_noise_sd: cfg.noise.color_noise_sd,
                    texture_amplitude: cfg.noise.texture_amplitude,
                    texture_scale: cfg.noise.texture_scale,
                    exposure_gain: cfg.exposure_gain(position),
                    seed,
                };
                let sub = render_dilution_patch(
                    eps_p,
                    &spectra.water,
                    &d,
                    &spectra.cones,
                    &noise,
                    cfg.subimage_height,
                    cfg.subimage_width,
                )?;
                for (k, window) in decompose_patches(&sub, &cfg.grid)?.into_iter().enumerate() {
                    let patch = if cfg.downscale == 1.0 {
                        window
                    } else {
                        downscale_bicubic(&window, cfg.downscale)?
                    };
                    let id = format!("{flavor}-c{:03}-p{position}-w{k}", percent(class));
                    let record = PatchRecord {
                        path: format!("patches/{flavor}/{id}.raw"),
                        id,
                        flavor: flavor.clone(),
                        dilution: level,
                        class,
                        position,
                        exposure_gain: noise.exposure_gain,
                        seed,
                        patch_index: k,
                    };
                    out.push((record, patch));
                }
            }
        }
    }
    Ok(out)
}

/// Writes the rendered dataset under `dir` and returns its manifest, which
/// is also saved as `dir/manifest.json`.
pub fn generate_synthetic_dataset(
    cfg: &ExperimentConfig,
    spectra: &SpectraSet,
    dir: &Path,
) -> Result<DatasetManifest> {
    let rendered = synthesize(cfg, spectra)?;
    let (patch_height, patch_width) = cfg.patch_shape().map_err(PureeError::Config)?;
    let patches_per_sample = cfg
        .grid
        .offsets(cfg.subimage_height, cfg.subimage_width)?
        .len();
    for flavor in &cfg.flavors {
        let d = dir.join("patches").join(flavor);
        std::fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let mut records = Vec::with_capacity(rendered.len());
    for (record, patch) in rendered {
        write_raw(&dir.join(&record.path), &patch)?;
        records.push(record);
    }
    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        master_seed: cfg.master_seed,
        flavors: cfg.flavors.clone(),
        patch_height,
        patch_width,
        patches_per_sample,
        samples: cfg.flavors.len() * NUM_CLASSES * POSITIONS as usize,
        records,
    };
    manifest.save(&dir.join(MANIFEST_FILE))?;
    log::info!(
        "wrote {} patches to {}",
        manifest.records.len(),
        dir.display()
    );
    Ok(manifest)
}

/// A manifest with its patches read back into memory.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub root: PathBuf,
    pub patches: Vec<PatchImage>,
}

impl LoadedDataset {
    /// Loads `manifest.json` (or the given file) and every patch it lists.
    pub fn open(manifest_path: &Path) -> Result<Self> {
        let manifest = DatasetManifest::load(manifest_path)?;
        let root = manifest_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let mut patches = Vec::with_capacity(manifest.records.len());
        for r in &manifest.records {
            let path = root.join(&r.path);
            let p = read_raw(&path)?;
            if (p.height(), p.width()) != (manifest.patch_height, manifest.patch_width) {
                return Err(format_err(&path, "patch size differs from the manifest"));
            }
            patches.push(p);
        }
        Ok(LoadedDataset {
            manifest,
            root,
            patches,
        })
    }

    /// Plane-major vectors of every patch, one row each.
    pub fn vectors(&self) -> Matrix {
        let cols = 3 * self.manifest.patch_height * self.manifest.patch_width;
        let mut data = Vec::with_capacity(cols * self.patches.len());
        for p in &self.patches {
            data.extend(vectorize(p));
        }
        Matrix::from_vec(self.patches.len(), cols, data).expect("uniform patch size")
    }
}
