//! Beer-Lambert dilution model and channel rendering.
//!
//! A purée diluted with water is modeled as a two-chromophore mixture with a
//! shared mean photon path length `l`. Absorbance is
//!
//! ```text
//! A(λ) = (ε_w(λ)·(1 − c_p) + ε_p(λ)·c_p) · l        (A ≥ 0)
//! ```
//!
//! and each color channel integrates its normalized responsivity against the
//! reflected fraction `exp(−A)` over 400–700 nm with the trapezoid rule on
//! the merged sample grid of every curve involved.

mod render;
mod spectrum;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use render::{render_dilution_patch, texture_field, SynthNoiseParams};
pub use spectrum::{ParseErrorKind, Spectrum, SpectrumParseError};

use crate::stats::trapezoid;

/// Integration band for channel responses, in nm.
pub const VISIBLE_BAND: (f64, f64) = (400.0, 700.0);

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OpticsError {
    #[error("wavelength and value counts differ ({wavelengths} vs {values})")]
    LengthMismatch { wavelengths: usize, values: usize },
    #[error("a spectrum needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("sample {index} is negative ({value})")]
    Negative { index: usize, value: f64 },
    #[error("wavelengths are non-increasing at sample {index}")]
    NonIncreasing { index: usize },
    #[error("wavelength {wavelength} nm outside spectrum domain [{lo}, {hi}]")]
    OutOfDomain { wavelength: f64, lo: f64, hi: f64 },
    #[error("spectrum domain {domain:?} does not cover [{lo}, {hi}] nm")]
    DoesNotCover {
        lo: f64,
        hi: f64,
        domain: (f64, f64),
    },
    #[error("responsivity curve integrates to zero over the visible band")]
    ZeroResponsivity,
    #[error("concentration must lie in [0, 1], got {0}")]
    InvalidConcentration(f64),
    #[error("path length must be positive and finite, got {0}")]
    InvalidPathLength(f64),
    #[error("invalid noise parameter `{0}`")]
    InvalidNoise(&'static str),
    #[error("patch dimensions must be at least 1x1, got {height}x{width}")]
    EmptyPatch { height: usize, width: usize },
}

/// Relative purée concentration and mean photon path length.
/// The water fraction is `1 − concentration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilutionParams {
    concentration: f64,
    path_length: f64,
}

impl DilutionParams {
    pub fn new(concentration: f64, path_length: f64) -> Result<Self, OpticsError> {
        if !(0.0..=1.0).contains(&concentration) {
            return Err(OpticsError::InvalidConcentration(concentration));
        }
        if !(path_length.is_finite() && path_length > 0.0) {
            return Err(OpticsError::InvalidPathLength(path_length));
        }
        Ok(DilutionParams {
            concentration,
            path_length,
        })
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn water_fraction(&self) -> f64 {
        1.0 - self.concentration
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }
}

/// R, G and B responsivity curves, each scaled to unit integral over
/// [`VISIBLE_BAND`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCurves {
    channels: [Spectrum; 3],
}

impl ConeCurves {
    /// Normalizes the three curves. Each must cover the visible band and
    /// have a positive integral there.
    pub fn new(r: Spectrum, g: Spectrum, b: Spectrum) -> Result<Self, OpticsError> {
        let (lo, hi) = VISIBLE_BAND;
        let norm = |s: Spectrum| -> Result<Spectrum, OpticsError> {
            let area = s.integral(lo, hi)?;
            if area <= 0.0 {
                return Err(OpticsError::ZeroResponsivity);
            }
            s.scaled(1.0 / area)
        };
        Ok(ConeCurves {
            channels: [norm(r)?, norm(g)?, norm(b)?],
        })
    }

    /// Curve for channel 0 (R), 1 (G) or 2 (B).
    pub fn channel(&self, c: usize) -> &Spectrum {
        &self.channels[c]
    }
}

/// Absorbance of the water/purée mixture at one wavelength.
pub fn mixture_absorbance(
    eps_p: &Spectrum,
    eps_w: &Spectrum,
    d: &DilutionParams,
    lambda_nm: f64,
) -> Result<f64, OpticsError> {
    let p = eps_p.value_at(lambda_nm)?;
    let w = eps_w.value_at(lambda_nm)?;
    Ok((w * d.water_fraction() + p * d.concentration()) * d.path_length())
}

/// Union of all sample wavelengths inside the band, plus the band edges.
fn merged_grid(curves: &[&Spectrum], lo: f64, hi: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|s| s.wavelengths().iter().copied())
        .filter(|&w| w > lo && w < hi)
        .collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Channel intensities `I_v = ∫ Z_v(λ) exp(−A(λ)) dλ` over the visible band.
pub fn perceived_rgb(
    eps_p: &Spectrum,
    eps_w: &Spectrum,
    d: &DilutionParams,
    cones: &ConeCurves,
) -> Result<[f64; 3], OpticsError> {
    let (lo, hi) = VISIBLE_BAND;
    let curves = [
        eps_p,
        eps_w,
        cones.channel(0),
        cones.channel(1),
        cones.channel(2),
    ];
    for s in curves {
        if !s.covers(lo, hi) {
            return Err(OpticsError::DoesNotCover {
                lo,
                hi,
                domain: s.domain(),
            });
        }
    }
    let grid = merged_grid(&curves, lo, hi);
    let transmitted: Vec<f64> = grid
        .iter()
        .map(|&l| mixture_absorbance(eps_p, eps_w, d, l).map(|a| libm::exp(-a)))
        .collect::<Result<_, _>>()?;
    let mut rgb = [0.0; 3];
    for (c, out) in rgb.iter_mut().enumerate() {
        let integrand: Vec<f64> = grid
            .iter()
            .zip(&transmitted)
            .map(|(&l, &t)| cones.channel(c).value_at(l).map(|z| z * t))
            .collect::<Result<_, _>>()?;
        *out = trapezoid(&grid, &integrand).clamp(0.0, 1.0);
    }
    Ok(rgb)
}

/// Rec.601 luma of an RGB triple.
pub fn luma(rgb: [f64; 3]) -> f64 {
    0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
}
