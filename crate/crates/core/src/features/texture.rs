//! Sum and difference histograms under a pixel translation, and the seven
//! texture statistics derived from them.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{FeatureError, GrayImage};

/// Number of possible sums (0..=510) and differences (−255..=255).
const BINS: usize = 511;
const DIFF_OFFSET: i32 = 255;

/// Translation `T_Δ`: pixel `(y, x)` is paired with `(y + dy, x + dx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Displacement {
    pub dy: isize,
    pub dx: isize,
}

/// Raw counts of `I + T_Δ I` and `I − T_Δ I` over the overlap region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumDiffHistograms {
    pub displacement: Displacement,
    /// Index `s` counts pixel pairs summing to `s`.
    pub sum_counts: Vec<u32>,
    /// Index `d + 255` counts pixel pairs whose difference is `d`.
    pub diff_counts: Vec<u32>,
    /// Number of pixel pairs in the overlap.
    pub total: u32,
}

impl SumDiffHistograms {
    pub fn sum_hist(&self) -> Vec<f64> {
        let n = f64::from(self.total);
        self.sum_counts.iter().map(|&c| f64::from(c) / n).collect()
    }

    pub fn diff_hist(&self) -> Vec<f64> {
        let n = f64::from(self.total);
        self.diff_counts.iter().map(|&c| f64::from(c) / n).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureFeatures {
    pub mean: f64,
    pub contrast: f64,
    pub homogeneity: f64,
    pub energy: f64,
    pub variance: f64,
    pub correlation: f64,
    /// Natural-log entropy of both histograms.
    pub entropy: f64,
}

impl TextureFeatures {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.mean,
            self.contrast,
            self.homogeneity,
            self.energy,
            self.variance,
            self.correlation,
            self.entropy,
        ]
    }
}

fn overlap(len: usize, shift: isize) -> core::ops::Range<usize> {
    if shift >= 0 {
        0..len.saturating_sub(shift as usize)
    } else {
        let s = shift.unsigned_abs().min(len);
        s..len
    }
}

pub fn sum_diff_histograms(
    gray: &GrayImage,
    delta: Displacement,
) -> Result<SumDiffHistograms, FeatureError> {
    let ys = overlap(gray.height(), delta.dy);
    let xs = overlap(gray.width(), delta.dx);
    if ys.is_empty() || xs.is_empty() {
        return Err(FeatureError::EmptyOverlap {
            dy: delta.dy,
            dx: delta.dx,
            height: gray.height(),
            width: gray.width(),
        });
    }
    let mut sum_counts = vec![0u32; BINS];
    let mut diff_counts = vec![0u32; BINS];
    let mut total = 0u32;
    for y in ys {
        let ty = (y as isize + delta.dy) as usize;
        for x in xs.clone() {
            let tx = (x as isize + delta.dx) as usize;
            let a = i32::from(gray.get(y, x));
            let b = i32::from(gray.get(ty, tx));
            sum_counts[(a + b) as usize] += 1;
            diff_counts[(a - b + DIFF_OFFSET) as usize] += 1;
            total += 1;
        }
    }
    Ok(SumDiffHistograms {
        displacement: delta,
        sum_counts,
        diff_counts,
        total,
    })
}

/// The seven statistics of a pair of sum/difference histograms, with
/// `0 · ln 0 = 0`.
pub fn texture_features(h: &SumDiffHistograms) -> TextureFeatures {
    let hs = h.sum_hist();
    let hd = h.diff_hist();
    let sums = || hs.iter().enumerate().map(|(i, &p)| (i as f64, p));
    let diffs = || {
        hd.iter()
            .enumerate()
            .map(|(j, &p)| ((j as i32 - DIFF_OFFSET) as f64, p))
    };
    let plogp = |p: f64| if p > 0.0 { p * libm::log(p) } else { 0.0 };

    let mean = 0.5 * sums().map(|(i, p)| i * p).sum::<f64>();
    let contrast = diffs().map(|(j, p)| j * j * p).sum::<f64>();
    let homogeneity = diffs().map(|(j, p)| p / (1.0 + j * j)).sum::<f64>();
    let energy = sums().map(|(_, p)| p * p).sum::<f64>() * diffs().map(|(_, p)| p * p).sum::<f64>();
    let spread = sums()
        .map(|(i, p)| (i - 2.0 * mean) * (i - 2.0 * mean) * p)
        .sum::<f64>();
    let entropy =
        -sums().map(|(_, p)| plogp(p)).sum::<f64>() - diffs().map(|(_, p)| plogp(p)).sum::<f64>();
    TextureFeatures {
        mean,
        contrast,
        homogeneity,
        energy,
        variance: 0.5 * (spread + contrast),
        correlation: 0.5 * (spread - contrast),
        entropy,
    }
}

pub fn sum_diff_texture(
    gray: &GrayImage,
    delta: Displacement,
) -> Result<(SumDiffHistograms, TextureFeatures), FeatureError> {
    let h = sum_diff_histograms(gray, delta)?;
    let t = texture_features(&h);
    Ok((h, t))
}
