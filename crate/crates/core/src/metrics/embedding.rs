use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::provider::{encode_png_base64, field, HttpClient, ProviderError};
use crate::raster::RasterImage;

use super::select::{Metric, ReferenceKind, Score};
use super::MetricError;

/// Unit-length embedding vector tagged with the provider that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    vector: Vec<f64>,
    provider: String,
}

impl Embedding {
    /// Normalizes `vector` to unit length. Zero or non-finite vectors are rejected.
    pub fn new(vector: Vec<f64>, provider: impl Into<String>) -> Result<Self, ProviderError> {
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(ProviderError::MalformedResponse(
                "embedding vector is empty, zero or non-finite".into(),
            ));
        }
        Ok(Embedding {
            vector: vector.into_iter().map(|v| v / norm).collect(),
            provider: provider.into(),
        })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }
}

/// Cosine similarity of two embeddings; mismatched lengths are malformed.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, ProviderError> {
    if a.vector.len() != b.vector.len() {
        return Err(ProviderError::MalformedResponse(format!(
            "embedding lengths differ: {} vs {}",
            a.vector.len(),
            b.vector.len()
        )));
    }
    let dot: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Text and image encoder sharing one embedding space.
pub trait EmbeddingPort: Send + Sync {
    fn embed_text(&self, text: &str) -> Result<Embedding, ProviderError>;
    fn embed_image(&self, image: &RasterImage) -> Result<Embedding, ProviderError>;
    fn provider(&self) -> String;
}

/// `100 · max(0, cos)` between text and image embeddings.
pub fn clip_score(text: &str, image: &RasterImage, embedder: &dyn EmbeddingPort) -> Result<Score, MetricError> {
    let t = embedder.embed_text(text)?;
    let i = embedder.embed_image(image)?;
    let value = 100.0 * cosine(&t, &i)?.max(0.0);
    Ok(Score {
        metric: Metric::ClipScore,
        value,
        reference: ReferenceKind::Text,
        provider: Some(embedder.provider()),
    })
}

pub fn dino_similarity(a: &RasterImage, b: &RasterImage, embedder: &dyn EmbeddingPort) -> Result<Score, MetricError> {
    let ea = embedder.embed_image(a)?;
    let eb = embedder.embed_image(b)?;
    Ok(Score {
        metric: Metric::Dino,
        value: cosine(&ea, &eb)?,
        reference: ReferenceKind::Image,
        provider: Some(embedder.provider()),
    })
}

fn byte_histogram(bytes: &[u8]) -> Vec<f64> {
    let mut h = vec![0.0; 256];
    for &b in bytes {
        h[b as usize] += 1.0;
    }
    h
}

/// Offline embedder: 256-bin histogram of the UTF-8 bytes of a text or the
/// RGB bytes of an image. Deterministic and dependency-free.
#[derive(Clone, Copy, Debug, Default)]
pub struct HistogramEmbedder;

impl HistogramEmbedder {
    pub const PROVIDER: &'static str = "mock:byte-histogram";
}

impl EmbeddingPort for HistogramEmbedder {
    fn embed_text(&self, text: &str) -> Result<Embedding, ProviderError> {
        let mut h = byte_histogram(text.as_bytes());
        if text.is_empty() {
            h[0] = 1.0;
        }
        Embedding::new(h, Self::PROVIDER)
    }

    fn embed_image(&self, image: &RasterImage) -> Result<Embedding, ProviderError> {
        Embedding::new(byte_histogram(image.pixels()), Self::PROVIDER)
    }

    fn provider(&self) -> String {
        Self::PROVIDER.into()
    }
}

/// Offline embedder whose text-image score is looked up by text: every image
/// embeds to `e1` and each text to a unit vector at the scripted cosine.
/// Unlisted texts use `default_score`.
#[derive(Clone, Debug, Default)]
pub struct ScriptedEmbedder {
    pub scores: HashMap<String, f64>,
    pub default_score: f64,
}

impl ScriptedEmbedder {
    pub const PROVIDER: &'static str = "mock:scripted";

    pub fn new(default_score: f64) -> Self {
        ScriptedEmbedder {
            scores: HashMap::new(),
            default_score,
        }
    }

    pub fn with_score(mut self, text: impl Into<String>, score: f64) -> Self {
        self.scores.insert(text.into(), score);
        self
    }
}

impl EmbeddingPort for ScriptedEmbedder {
    fn embed_text(&self, text: &str) -> Result<Embedding, ProviderError> {
        let score = self.scores.get(text).copied().unwrap_or(self.default_score);
        let c = (score / 100.0).clamp(-1.0, 1.0);
        Embedding::new(vec![c, (1.0 - c * c).max(0.0).sqrt()], Self::PROVIDER)
    }

    fn embed_image(&self, _image: &RasterImage) -> Result<Embedding, ProviderError> {
        Embedding::new(vec![1.0, 0.0], Self::PROVIDER)
    }

    fn provider(&self) -> String {
        Self::PROVIDER.into()
    }
}

/// Remote embedder: POST `{kind, payload}` → `{vector}`.
#[derive(Clone, Debug)]
pub struct HttpEmbedder {
    pub client: HttpClient,
}

impl HttpEmbedder {
    pub fn new(client: HttpClient) -> Self {
        HttpEmbedder { client }
    }

    fn request(&self, kind: &str, payload: String) -> Result<Embedding, ProviderError> {
        let reply = self.client.post_json("", &json!({ "kind": kind, "payload": payload }))?;
        let vector: Vec<f64> = field(&reply, "vector")?
            .as_array()
            .ok_or_else(|| ProviderError::MalformedResponse("\"vector\" is not an array".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| ProviderError::MalformedResponse("non-numeric vector entry".into())))
            .collect::<Result<_, _>>()?;
        Embedding::new(vector, self.provider())
    }
}

impl EmbeddingPort for HttpEmbedder {
    fn embed_text(&self, text: &str) -> Result<Embedding, ProviderError> {
        self.request("text", text.to_string())
    }

    fn embed_image(&self, image: &RasterImage) -> Result<Embedding, ProviderError> {
        self.request("image", encode_png_base64(image))
    }

    fn provider(&self) -> String {
        format!("http:{}", self.client.base_url)
    }
}
