//! Synthetic purée dilution experiments: spectra and dataset files, model
//! containers, the experiment driver and its reports.
//!
//! The numerical work lives in [`puree_core`]; this crate adds everything
//! that touches the filesystem.

pub mod config;
pub mod dataset;
pub mod driver;
pub mod error;
pub mod experiment;
pub mod features_io;
pub mod formats;
pub mod model;
pub mod report;
pub mod seeds;
pub mod spectra;

pub use config::{ExperimentConfig, Profile};
pub use error::{PureeError, Result};
pub use experiment::run_full_experiment;
pub use report::ExperimentReport;
