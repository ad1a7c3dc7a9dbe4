//! Handcrafted feature extraction over a dataset and its CSV export.

use std::path::Path;

use puree_core::features::{descriptive_stats, handcrafted_features, HANDCRAFTED_LEN};
use puree_core::matrix::Matrix;

use crate::dataset::LoadedDataset;
use crate::error::{PureeError, Result};

/// Column names after `id`: 64 color bins, 7 texture features and the
/// descriptive statistics.
pub fn feature_columns() -> Vec<String> {
    let mut cols: Vec<String> = (0..64).map(|i| format!("color_{i:02}")).collect();
    cols.extend(
        [
            "mean",
            "contrast",
            "homogeneity",
            "energy",
            "variance",
            "correlation",
            "entropy",
        ]
        .iter()
        .map(|n| format!("texture_{n}")),
    );
    cols.extend(
        [
            "mean_r",
            "mean_g",
            "mean_b",
            "sd_r",
            "sd_g",
            "sd_b",
            "brightness",
            "local_entropy_mean",
            "local_entropy_sd",
        ]
        .map(String::from),
    );
    cols
}

/// The 71 handcrafted features of every patch, one row each.
pub fn handcrafted_matrix(data: &LoadedDataset) -> Result<Matrix> {
    let mut values = Vec::with_capacity(data.patches.len() * HANDCRAFTED_LEN);
    for p in &data.patches {
        values.extend(handcrafted_features(p)?);
    }
    Ok(
        Matrix::from_vec(data.patches.len(), HANDCRAFTED_LEN, values)
            .expect("fixed feature length"),
    )
}

/// Writes `id` plus [`feature_columns`] for every patch.
pub fn write_feature_csv(path: &Path, data: &LoadedDataset) -> Result<()> {
    let csv_err = |source| PureeError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["id".to_string()];
    header.extend(feature_columns());
    w.write_record(&header).map_err(csv_err)?;
    for (record, p) in data.manifest.records.iter().zip(&data.patches) {
        let s = descriptive_stats(p);
        let mut row = vec![record.id.clone()];
        let values = handcrafted_features(p)?
            .into_iter()
            .chain(s.mean_rgb)
            .chain(s.sd_rgb)
            .chain([s.brightness, s.entropy_mean, s.entropy_sd]);
        row.extend(values.map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| PureeError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
