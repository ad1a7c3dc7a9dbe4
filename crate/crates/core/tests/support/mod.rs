//! Brute-force reference computations shared by the integration tests.
//! These deliberately avoid the library's own helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use puree_core::features::GrayImage;
use puree_core::imaging::PatchImage;
use rand::Rng;

/// 64-bin histogram by exhaustive nearest-center search over all 64 RGB
/// centers in Euclidean distance, lowest index on ties.
pub fn color_histogram(p: &PatchImage) -> [u32; 64] {
    let centre = |i: usize| 0.125 + 0.25 * i as f64;
    let mut counts = [0u32; 64];
    for y in 0..p.height() {
        for x in 0..p.width() {
            let px = p.rgb(y, x);
            let mut best = (f64::INFINITY, 0);
            for r in 0..4 {
                for g in 0..4 {
                    for b in 0..4 {
                        let d = (px[0] - centre(r)).powi(2)
                            + (px[1] - centre(g)).powi(2)
                            + (px[2] - centre(b)).powi(2);
                        if d < best.0 {
                            best = (d, 16 * r + 4 * g + b);
                        }
                    }
                }
            }
            counts[best.1] += 1;
        }
    }
    counts
}

/// Every in-bounds pixel pair `(I(y, x), I(y + dy, x + dx))`.
pub fn pixel_pairs(g: &GrayImage, dy: isize, dx: isize) -> Vec<(i64, i64)> {
    let mut pairs = Vec::new();
    for y in 0..g.height() as isize {
        for x in 0..g.width() as isize {
            let (ty, tx) = (y + dy, x + dx);
            if ty >= 0 && tx >= 0 && (ty as usize) < g.height() && (tx as usize) < g.width() {
                pairs.push((
                    i64::from(g.get(y as usize, x as usize)),
                    i64::from(g.get(ty as usize, tx as usize)),
                ));
            }
        }
    }
    pairs
}

/// Sparse sum and difference counts keyed by the sum / difference value.
pub fn sum_diff_counts(
    g: &GrayImage,
    dy: isize,
    dx: isize,
) -> (BTreeMap<i64, u32>, BTreeMap<i64, u32>) {
    let mut sums = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for (a, b) in pixel_pairs(g, dy, dx) {
        *sums.entry(a + b).or_insert(0) += 1;
        *diffs.entry(a - b).or_insert(0) += 1;
    }
    (sums, diffs)
}

/// The seven texture statistics evaluated directly on pixel pairs:
/// mean, contrast, homogeneity, energy, variance, correlation, entropy.
pub fn texture(g: &GrayImage, dy: isize, dx: isize) -> [f64; 7] {
    let pairs = pixel_pairs(g, dy, dx);
    let n = pairs.len() as f64;
    let mu = pairs
        .iter()
        .map(|&(a, b)| (a + b) as f64 / 2.0)
        .sum::<f64>()
        / n;
    let contrast = pairs
        .iter()
        .map(|&(a, b)| ((a - b) * (a - b)) as f64)
        .sum::<f64>()
        / n;
    let homogeneity = pairs
        .iter()
        .map(|&(a, b)| 1.0 / (1.0 + ((a - b) * (a - b)) as f64))
        .sum::<f64>()
        / n;
    let spread = pairs
        .iter()
        .map(|&(a, b)| ((a + b) as f64 - 2.0 * mu).powi(2))
        .sum::<f64>()
        / n;
    let (sums, diffs) = sum_diff_counts(g, dy, dx);
    let sq = |m: &BTreeMap<i64, u32>| m.values().map(|&c| (c as f64 / n).powi(2)).sum::<f64>();
    let ent = |m: &BTreeMap<i64, u32>| {
        -m.values()
            .map(|&c| (c as f64 / n) * (c as f64 / n).ln())
            .sum::<f64>()
    };
    [
        mu,
        contrast,
        homogeneity,
        sq(&sums) * sq(&diffs),
        0.5 * (spread + contrast),
        0.5 * (spread - contrast),
        ent(&sums) + ent(&diffs),
    ]
}

pub fn random_gray<R: Rng>(rng: &mut R, h: usize, w: usize) -> GrayImage {
    GrayImage::new(h, w, (0..h * w).map(|_| rng.random::<u8>()).collect()).unwrap()
}

/// Random 8-bit RGB patch, with some channels pinned to the exact
/// quantization boundaries 0.25, 0.5 and 0.75.
pub fn random_patch<R: Rng>(rng: &mut R, h: usize, w: usize) -> PatchImage {
    let data = (0..3 * h * w)
        .map(|_| {
            if rng.random_bool(0.1) {
                [0.25, 0.5, 0.75][rng.random_range(0..3)]
            } else {
                f64::from(rng.random::<u8>()) / 255.0
            }
        })
        .collect();
    PatchImage::from_planes(h, w, data).unwrap()
}

/// `|a − b| <= tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Reads a bundled spectrum from the workspace `data/` directory.
pub fn bundled_spectrum(rel: &str) -> puree_core::optics::Spectrum {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    puree_core::optics::Spectrum::from_csv_str(&text).unwrap()
}

pub fn bundled_cones() -> puree_core::optics::ConeCurves {
    puree_core::optics::ConeCurves::new(
        bundled_spectrum("cones_r.csv"),
        bundled_spectrum("cones_g.csv"),
        bundled_spectrum("cones_b.csv"),
    )
    .unwrap()
}
