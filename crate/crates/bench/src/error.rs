use std::path::PathBuf;

use holoqa::denoise::DenoiseError;
use holoqa::field::FieldError;
use holoqa::metrics::MetricError;
use holoqa::stats::StatsError;
use holoqa::transform::TransformError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("scene has no point with non-zero amplitude")]
    ZeroScene,
    #[error("no stimulus of track {0} has both scores and MOS")]
    NoOverlap(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Denoise(#[from] DenoiseError),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
    let path = path.into();
    move |source| BenchError::Io { path, source }
}
