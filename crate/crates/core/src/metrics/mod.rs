//! Validity checks, image similarity, embedding scores and candidate selection.

mod embedding;
mod image;
mod select;
mod validity;

use thiserror::Error;

use crate::provider::ProviderError;

pub use embedding::{
    clip_score, cosine, dino_similarity, Embedding, EmbeddingPort, HistogramEmbedder, HttpEmbedder,
    ScriptedEmbedder,
};
pub use image::{gaussian_window, mse, ssim, SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW};
pub use select::{best_index, select_best, Metric, ReferenceKind, Score};
pub use validity::{check_svg, preservation_check, Diagnostic, ValidityReport, VALIDITY_RESOLUTION};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    TooSmall { width: u32, height: u32, window: usize },
    #[error("no candidates to select from")]
    EmptyCandidateSet,
    #[error("candidate scores mix metrics {first} and {other}")]
    MixedMetrics { first: String, other: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

impl MetricError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricError::DimensionMismatch { .. } => "DimensionMismatch",
            MetricError::TooSmall { .. } => "TooSmall",
            MetricError::EmptyCandidateSet => "EmptyCandidateSet",
            MetricError::MixedMetrics { .. } => "MixedMetrics",
            MetricError::Provider(e) => e.code(),
        }
    }
}
