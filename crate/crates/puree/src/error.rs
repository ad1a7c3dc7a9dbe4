use std::path::PathBuf;

use puree_core::classifiers::ClassifierError;
use puree_core::eval::EvalError;
use puree_core::features::FeatureError;
use puree_core::imaging::ImagingError;
use puree_core::neural::NeuralError;
use puree_core::optics::{OpticsError, SpectrumParseError};

#[derive(Debug, thiserror::Error)]
pub enum PureeError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Spectrum {
        path: PathBuf,
        #[source]
        source: SpectrumParseError,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{stage} stage failed (partial report in {}): {source}", report_dir.display())]
    RunFailed {
        stage: String,
        report_dir: PathBuf,
        #[source]
        source: Box<PureeError>,
    },
}

pub type Result<T, E = PureeError> = std::result::Result<T, E>;

/// Attaches a path to an IO error.
pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PureeError {
    let path = path.into();
    move |source| PureeError::Io { path, source }
}

pub(crate) fn format_err(path: impl Into<PathBuf>, message: impl Into<String>) -> PureeError {
    PureeError::Format {
        path: path.into(),
        message: message.into(),
    }
}
