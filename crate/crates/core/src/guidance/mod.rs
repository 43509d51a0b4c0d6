//! Ports to the visual and textual guidance tools: text-to-image, image
//! editing, captioning and completion suggestions, with offline mocks.

mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::ProviderError;
use crate::raster::{RasterImage, DEFAULT_RESOLUTION};

pub use http::HttpGuidance;
pub use mock::{MockGuidance, BLANK_CAPTION, SUGGESTION_PREFIX};

pub const MAX_CAPTION_WORDS: usize = 60;

pub fn text_to_image_prompt(description: &str) -> String {
    format!("Minimalist vector-style icon of {description}. Empty background.")
}

pub fn edit_image_prompt(description: &str) -> String {
    format!(
        "Keep as many original elements as possible, but edit by adding elements to transform it into a minimalist vector-style icon: {description}"
    )
}

pub const CAPTION_PROMPT: &str = "Please describe it within 50 words.";

pub fn suggestion_prompt(description: &str) -> String {
    format!(
        "This image is an unfinished drawing. List the elements that still need to be added so that it depicts: {description}"
    )
}

/// Keeps at most [`MAX_CAPTION_WORDS`] whitespace-separated words.
pub fn truncate_words(text: &str) -> String {
    text.split_whitespace().take(MAX_CAPTION_WORDS).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Mock,
    Url(String),
}

impl Endpoint {
    /// `"mock"` (any case) selects the offline backend; anything else is a URL.
    pub fn parse(value: &str) -> Endpoint {
        if value.trim().eq_ignore_ascii_case("mock") {
            Endpoint::Mock
        } else {
            Endpoint::Url(value.trim().to_string())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: Endpoint,
    pub timeout: Duration,
    pub max_retries: u32,
    pub seed: u64,
    /// Side length of generated images.
    pub resolution: u32,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: Endpoint::Mock,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            seed: 0,
            resolution: DEFAULT_RESOLUTION,
            api_key: None,
        }
    }
}

impl BackendConfig {
    pub fn mock(seed: u64) -> Self {
        BackendConfig {
            seed,
            ..BackendConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GuidanceError> {
        if self.timeout.is_zero() {
            return Err(GuidanceError::InvalidConfig("timeout must be positive".into()));
        }
        if self.resolution < crate::raster::MIN_RESOLUTION {
            return Err(GuidanceError::InvalidConfig(format!("resolution {} is too small", self.resolution)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("guidance text is empty")]
    EmptyText,
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

impl GuidanceError {
    pub fn code(&self) -> &'static str {
        match self {
            GuidanceError::EmptyText => "EmptyText",
            GuidanceError::InvalidConfig(_) => "InvalidConfig",
            GuidanceError::Provider(e) => e.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub provider: String,
    pub seed: u64,
}

/// A guidance value with the backend and seed that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guided<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Guided<T> {
    pub fn new(value: T, provider: impl Into<String>, seed: u64) -> Self {
        Guided {
            value,
            provenance: Provenance {
                provider: provider.into(),
                seed,
            },
        }
    }
}

/// Guidance gathered for one query. Every present field carries provenance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GuidanceBundle {
    pub image_complete: Option<Guided<RasterImage>>,
    pub image_edited: Option<Guided<RasterImage>>,
    pub image_partial: Option<Guided<RasterImage>>,
    pub text_complete: Option<Guided<String>>,
    pub text_suggestion: Option<Guided<String>>,
}

impl GuidanceBundle {
    pub fn is_empty(&self) -> bool {
        self.image_complete.is_none()
            && self.image_edited.is_none()
            && self.image_partial.is_none()
            && self.text_complete.is_none()
            && self.text_suggestion.is_none()
    }

    /// `(field name, provenance)` for each populated field.
    pub fn provenance(&self) -> Vec<(&'static str, &Provenance)> {
        let mut out = Vec::new();
        if let Some(g) = &self.image_complete {
            out.push(("image_complete", &g.provenance));
        }
        if let Some(g) = &self.image_edited {
            out.push(("image_edited", &g.provenance));
        }
        if let Some(g) = &self.image_partial {
            out.push(("image_partial", &g.provenance));
        }
        if let Some(g) = &self.text_complete {
            out.push(("text_complete", &g.provenance));
        }
        if let Some(g) = &self.text_suggestion {
            out.push(("text_suggestion", &g.provenance));
        }
        out
    }
}

/// The four remote guidance tools. Implementations must be pure functions of
/// their inputs and `seed` when they claim determinism.
pub trait GuidanceTools: Send + Sync {
    fn provider(&self) -> String;
    fn text_to_image(&self, text: &str, seed: u64) -> Result<RasterImage, GuidanceError>;
    fn edit_image(&self, image: &RasterImage, text: &str, seed: u64) -> Result<RasterImage, GuidanceError>;
    fn caption_image(&self, image: &RasterImage, seed: u64) -> Result<String, GuidanceError>;
    fn suggest_completion(&self, text: &str, partial_image: &RasterImage, seed: u64) -> Result<String, GuidanceError>;
}

/// Builds the backend selected by `cfg.endpoint`.
pub fn backend_for(cfg: &BackendConfig) -> Result<Box<dyn GuidanceTools>, GuidanceError> {
    cfg.validate()?;
    Ok(match &cfg.endpoint {
        Endpoint::Mock => Box::new(MockGuidance::new(cfg.resolution)),
        Endpoint::Url(url) => Box::new(HttpGuidance::new(url.clone(), cfg)),
    })
}

fn require_text(text: &str) -> Result<(), GuidanceError> {
    if text.trim().is_empty() {
        Err(GuidanceError::EmptyText)
    } else {
        Ok(())
    }
}

pub fn text_to_image(text: &str, cfg: &BackendConfig) -> Result<RasterImage, GuidanceError> {
    backend_for(cfg)?.text_to_image(text, cfg.seed)
}

pub fn edit_image(image: &RasterImage, text: &str, cfg: &BackendConfig) -> Result<RasterImage, GuidanceError> {
    backend_for(cfg)?.edit_image(image, text, cfg.seed)
}

pub fn caption_image(image: &RasterImage, cfg: &BackendConfig) -> Result<String, GuidanceError> {
    backend_for(cfg)?.caption_image(image, cfg.seed)
}

pub fn suggest_completion(text: &str, partial_image: &RasterImage, cfg: &BackendConfig) -> Result<String, GuidanceError> {
    backend_for(cfg)?.suggest_completion(text, partial_image, cfg.seed)
}
