//! Core algorithms for estimating purée dilution from images.
//!
//! Everything here is pure computation over in-memory buffers and builds
//! without `std`: the Beer-Lambert dilution renderer, patch geometry and
//! resampling, handcrafted color/texture features, a dense stacked
//! autoencoder engine, random forest and SVM baselines, and the
//! cross-validation metrics. File formats, configuration and the CLI live
//! in the `puree` crate.
#![no_std]

extern crate alloc;

pub mod classifiers;
pub mod eval;
pub mod features;
pub mod imaging;
pub mod matrix;
pub mod neural;
pub mod optics;
pub mod rng;
mod stats;

/// Number of dilution classes (20, 40, 60, 80 and 100 percent).
pub const NUM_CLASSES: usize = 5;

/// Relative concentrations of the dilution classes, indexed by class.
pub const DILUTION_LEVELS: [f64; NUM_CLASSES] = [0.2, 0.4, 0.6, 0.8, 1.0];
