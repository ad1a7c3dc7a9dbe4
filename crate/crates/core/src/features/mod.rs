//! Handcrafted color and texture descriptors plus the descriptive
//! statistics used to summarize image classes.

mod color;
mod entropy;
mod texture;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use color::{color_histogram64, ColorHistogram64, COLOR_BIN_CENTERS};
pub use entropy::{local_entropy_summary, LocalEntropy, ENTROPY_WINDOW};
pub use texture::{
    sum_diff_histograms, sum_diff_texture, texture_features, Displacement, SumDiffHistograms,
    TextureFeatures,
};

use crate::imaging::PatchImage;
use crate::optics::luma;
use crate::stats::{mean, population_sd};

/// 64 color bins followed by 7 texture features.
pub const HANDCRAFTED_LEN: usize = 71;

/// Displacements whose texture features are averaged.
pub const TEXTURE_DISPLACEMENTS: [Displacement; 2] =
    [Displacement { dy: 0, dx: 1 }, Displacement { dy: 1, dx: 0 }];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("displacement ({dy}, {dx}) leaves no overlap in a {height}x{width} image")]
    EmptyOverlap {
        dy: isize,
        dx: isize,
        height: usize,
        width: usize,
    },
    #[error("gray image needs {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("gray image dimensions must be at least 1x1")]
    Empty,
}

/// 8-bit single-channel image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self, FeatureError> {
        if height == 0 || width == 0 {
            return Err(FeatureError::Empty);
        }
        if data.len() != height * width {
            return Err(FeatureError::LengthMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        Ok(GrayImage {
            height,
            width,
            data,
        })
    }

    /// Rec.601 luma rounded to the nearest of 0..=255.
    pub fn from_patch(p: &PatchImage) -> Self {
        let mut data = Vec::with_capacity(p.pixel_count());
        for y in 0..p.height() {
            for x in 0..p.width() {
                let v = libm::round(luma(p.rgb(y, x)) * 255.0).clamp(0.0, 255.0);
                data.push(v as u8);
            }
        }
        GrayImage {
            height: p.height(),
            width: p.width(),
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }
}

/// Mean Rec.601 luma over all pixels, in [0, 1].
pub fn luma_brightness(p: &PatchImage) -> f64 {
    let (r, g, b) = (p.plane(0), p.plane(1), p.plane(2));
    let total: f64 = (0..p.pixel_count()).map(|i| luma([r[i], g[i], b[i]])).sum();
    (total / p.pixel_count() as f64).clamp(0.0, 1.0)
}

/// Per-image color, brightness and texture summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean_rgb: [f64; 3],
    pub sd_rgb: [f64; 3],
    /// Mean Rec.601 luma; 1 is fully saturated white.
    pub brightness: f64,
    /// Mean of the 9 × 9 local entropy map, in bits.
    pub entropy_mean: f64,
    pub entropy_sd: f64,
}

pub fn descriptive_stats(p: &PatchImage) -> DescriptiveStats {
    let mut mean_rgb = [0.0; 3];
    let mut sd_rgb = [0.0; 3];
    for c in 0..3 {
        mean_rgb[c] = mean(p.plane(c));
        sd_rgb[c] = population_sd(p.plane(c));
    }
    let ent = local_entropy_summary(&GrayImage::from_patch(p));
    DescriptiveStats {
        mean_rgb,
        sd_rgb,
        brightness: luma_brightness(p),
        entropy_mean: ent.mean,
        entropy_sd: ent.sd,
    }
}

/// The 71 handcrafted features: normalized 64-bin color histogram followed
/// by the seven sum/difference texture features of the quantized luma
/// image, averaged over [`TEXTURE_DISPLACEMENTS`].
pub fn handcrafted_features(p: &PatchImage) -> Result<Vec<f64>, FeatureError> {
    let mut out = Vec::with_capacity(HANDCRAFTED_LEN);
    out.extend_from_slice(color_histogram64(p).bins());
    let gray = GrayImage::from_patch(p);
    let mut acc = [0.0; 7];
    for d in TEXTURE_DISPLACEMENTS {
        let (_, t) = sum_diff_texture(&gray, d)?;
        for (a, v) in acc.iter_mut().zip(t.to_array()) {
            *a += v;
        }
    }
    out.extend(acc.iter().map(|a| a / TEXTURE_DISPLACEMENTS.len() as f64));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_extremes() {
        let w = PatchImage::filled(3, 3, [1.0; 3]).unwrap();
        let k = PatchImage::filled(3, 3, [0.0; 3]).unwrap();
        assert!((luma_brightness(&w) - 1.0).abs() < 1e-15);
        assert_eq!(luma_brightness(&k), 0.0);
        let blueberry20 = luma([0.622, 0.512, 0.449]);
        assert!((blueberry20 - 0.538).abs() < 0.001);
    }

    #[test]
    fn handcrafted_shape_and_normalization() {
        let p =
            PatchImage::from_fn(8, 10, |c, y, x| ((c + 2 * y + 3 * x) % 9) as f64 / 8.0).unwrap();
        let f = handcrafted_features(&p).unwrap();
        assert_eq!(f.len(), HANDCRAFTED_LEN);
        assert!((f[..64].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(f, handcrafted_features(&p).unwrap());
    }

    #[test]
    fn gray_quantization() {
        let p = PatchImage::filled(1, 2, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(GrayImage::from_patch(&p).as_slice(), &[255, 255]);
        let mid = PatchImage::filled(1, 1, [0.502, 0.502, 0.502]).unwrap();
        assert_eq!(GrayImage::from_patch(&mid).get(0, 0), 128);
    }

    #[test]
    fn descriptive_constant_patch() {
        let p = PatchImage::filled(12, 12, [0.2, 0.4, 0.6]).unwrap();
        let s = descriptive_stats(&p);
        assert!((s.mean_rgb[1] - 0.4).abs() < 1e-15);
        assert!(s.sd_rgb.iter().all(|&v| v < 1e-12));
        assert_eq!(s.entropy_mean, 0.0);
    }
}
