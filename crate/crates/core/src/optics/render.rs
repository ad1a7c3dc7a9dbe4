use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{perceived_rgb, ConeCurves, DilutionParams, OpticsError, Spectrum};
use crate::imaging::PatchImage;
use crate::rng::substream;

/// Acquisition variation applied on top of the noiseless rendered color.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthNoiseParams {
    /// Per-pixel, per-channel Gaussian sd in [0, 1] intensity units.
    pub color_noise_sd: f64,
    /// Half-range of the multiplicative texture field around 1.
    pub texture_amplitude: f64,
    /// Box-blur width in pixels controlling texture correlation length.
    pub texture_scale: f64,
    pub exposure_gain: f64,
    pub seed: u64,
}

impl Default for SynthNoiseParams {
    fn default() -> Self {
        SynthNoiseParams {
            color_noise_sd: 0.02,
            texture_amplitude: 0.08,
            texture_scale: 6.0,
            exposure_gain: 1.0,
            seed: 0,
        }
    }
}

impl SynthNoiseParams {
    pub fn noiseless() -> Self {
        SynthNoiseParams {
            color_noise_sd: 0.0,
            texture_amplitude: 0.0,
            texture_scale: 0.0,
            exposure_gain: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.color_noise_sd) {
            return Err(OpticsError::InvalidNoise("color_noise_sd"));
        }
        if !ok(self.texture_amplitude) {
            return Err(OpticsError::InvalidNoise("texture_amplitude"));
        }
        if !ok(self.texture_scale) {
            return Err(OpticsError::InvalidNoise("texture_scale"));
        }
        if !(self.exposure_gain.is_finite() && self.exposure_gain > 0.0) {
            return Err(OpticsError::InvalidNoise("exposure_gain"));
        }
        Ok(())
    }
}

/// Horizontal then vertical running box mean with clamp-to-edge borders.
fn box_blur(field: &mut [f64], height: usize, width: usize, radius: usize) {
    if radius == 0 {
        return;
    }
    let r = radius as isize;
    let norm = 1.0 / (2 * radius + 1) as f64;
    let mut tmp = vec![0.0; field.len()];
    for y in 0..height {
        let row = &field[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for k in -r..=r {
                let xx = (x as isize + k).clamp(0, width as isize - 1) as usize;
                acc += row[xx];
            }
            tmp[y * width + x] = acc * norm;
        }
    }
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for k in -r..=r {
                let yy = (y as isize + k).clamp(0, height as isize - 1) as usize;
                acc += tmp[yy * width + x];
            }
            field[y * width + x] = acc * norm;
        }
    }
}

/// Low-frequency multiplicative field in `[1 − amplitude, 1 + amplitude]`.
///
/// Seeded white noise is smoothed by three box-blur passes of width
/// `2·⌊scale/2⌋ + 1`, centered, and scaled so its largest deviation equals
/// `amplitude`.
pub fn texture_field(
    height: usize,
    width: usize,
    amplitude: f64,
    scale: f64,
    seed: u64,
) -> Vec<f64> {
    let n = height * width;
    if amplitude == 0.0 || n == 0 {
        return vec![1.0; n];
    }
    let mut rng = substream(seed, 0);
    let mut field: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let radius = (scale / 2.0) as usize;
    for _ in 0..3 {
        box_blur(&mut field, height, width, radius);
    }
    let mean = field.iter().sum::<f64>() / n as f64;
    let peak = field.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return vec![1.0; n];
    }
    field
        .iter()
        .map(|v| 1.0 + amplitude * (v - mean) / peak)
        .collect()
}

/// Renders a `height × width` patch of the diluted mixture.
///
/// Each pixel is `clamp(base · texture · gain + noise, 0, 1)` where `base` is
/// [`perceived_rgb`]. The output depends only on the inputs and the seed.
pub fn render_dilution_patch(
    eps_p: &Spectrum,
    eps_w: &Spectrum,
    d: &DilutionParams,
    cones: &ConeCurves,
    noise: &SynthNoiseParams,
    height: usize,
    width: usize,
) -> Result<PatchImage, OpticsError> {
    if height == 0 || width == 0 {
        return Err(OpticsError::EmptyPatch { height, width });
    }
    noise.validate()?;
    let base = perceived_rgb(eps_p, eps_w, d, cones)?;
    let field = texture_field(
        height,
        width,
        noise.texture_amplitude,
        noise.texture_scale,
        noise.seed,
    );
    let n = height * width;
    let mut data = Vec::with_capacity(3 * n);
    let mut rng = substream(noise.seed, 1);
    for &b in &base {
        for &t in &field {
            let jitter = if noise.color_noise_sd > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                noise.color_noise_sd * z
            } else {
                0.0
            };
            data.push((b * t * noise.exposure_gain + jitter).clamp(0.0, 1.0));
        }
    }
    Ok(PatchImage::from_planes(height, width, data).expect("rendered values are clamped"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectra() -> (Spectrum, Spectrum, ConeCurves) {
        let p = Spectrum::new(vec![380.0, 550.0, 780.0], vec![0.2, 1.0, 0.1]).unwrap();
        let w = Spectrum::constant(380.0, 780.0, 0.01).unwrap();
        let c = |lo: f64, hi: f64| {
            Spectrum::new(vec![380.0, lo, hi, 780.0], vec![0.0, 1.0, 1.0, 0.0]).unwrap()
        };
        let cones = ConeCurves::new(c(560.0, 700.0), c(480.0, 600.0), c(400.0, 500.0)).unwrap();
        (p, w, cones)
    }

    #[test]
    fn noiseless_patch_is_constant() {
        let (p, w, cones) = spectra();
        let d = DilutionParams::new(0.6, 2.0).unwrap();
        let base = perceived_rgb(&p, &w, &d, &cones).unwrap();
        let img = render_dilution_patch(&p, &w, &d, &cones, &SynthNoiseParams::noiseless(), 4, 5)
            .unwrap();
        for (c, &b) in base.iter().enumerate() {
            assert!(img.plane(c).iter().all(|&v| v == b));
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let (p, w, cones) = spectra();
        let d = DilutionParams::new(0.4, 2.0).unwrap();
        let noise = SynthNoiseParams {
            seed: 99,
            ..Default::default()
        };
        let a = render_dilution_patch(&p, &w, &d, &cones, &noise, 16, 24).unwrap();
        let b = render_dilution_patch(&p, &w, &d, &cones, &noise, 16, 24).unwrap();
        let bits = |img: &PatchImage| {
            img.as_slice()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let other = render_dilution_patch(
            &p,
            &w,
            &d,
            &cones,
            &SynthNoiseParams { seed: 100, ..noise },
            16,
            24,
        )
        .unwrap();
        assert_ne!(bits(&a), bits(&other));
    }

    #[test]
    fn texture_field_range() {
        let f = texture_field(20, 30, 0.1, 6.0, 3);
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 0.9 - 1e-12 && hi <= 1.1 + 1e-12);
        assert!((lo - 0.9).abs() < 1e-12 || (hi - 1.1).abs() < 1e-12);
    }

    #[test]
    fn bad_params_rejected() {
        let (p, w, cones) = spectra();
        let d = DilutionParams::new(0.4, 2.0).unwrap();
        let noise = SynthNoiseParams {
            exposure_gain: 0.0,
            ..Default::default()
        };
        assert!(render_dilution_patch(&p, &w, &d, &cones, &noise, 4, 4).is_err());
        assert!(
            render_dilution_patch(&p, &w, &d, &cones, &SynthNoiseParams::default(), 0, 4).is_err()
        );
    }
}
