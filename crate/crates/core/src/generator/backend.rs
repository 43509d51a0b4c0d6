use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::provider::{encode_png_base64, str_field, HttpClient, ProviderError};
use crate::raster::{hex, RasterImage};
use crate::svg::{parse_svg, serialize_svg, ParseMode};
use crate::synth::{keyed_rng, random_document, random_shape};

use super::extract::extract_svg;
use super::EXISTING_SVG_MARKER;

/// A model that answers an instruction (plus optional images) with text.
pub trait GeneratorBackend: Send + Sync {
    fn complete(&self, prompt: &str, images: &[RasterImage], seed: u64, max_tokens: u32) -> Result<String, ProviderError>;
    fn provider(&self) -> String;
}

/// Content address of a generation request.
pub fn request_hash(prompt: &str, images: &[RasterImage], seed: u64) -> String {
    let mut h = Sha256::new();
    h.update((prompt.len() as u64).to_le_bytes());
    h.update(prompt.as_bytes());
    for image in images {
        h.update(image.content_hash().as_bytes());
    }
    h.update(seed.to_le_bytes());
    hex(&h.finalize())
}

/// Offline generator. Requests whose hash is in the fixture store get the
/// stored reply; others get a seeded procedural icon wrapped in prose. For
/// completion prompts the existing SVG is kept and new shapes are appended.
#[derive(Clone, Debug, Default)]
pub struct MockGenerator {
    fixtures: HashMap<String, String>,
}

impl MockGenerator {
    pub const PROVIDER: &'static str = "mock:generator";

    pub fn new() -> Self {
        MockGenerator::default()
    }

    pub fn with_fixture(mut self, hash: impl Into<String>, reply: impl Into<String>) -> Self {
        self.fixtures.insert(hash.into(), reply.into());
        self
    }

    /// Loads every `<hash>.svg` file in `dir`.
    pub fn load_fixtures(dir: &Path) -> std::io::Result<Self> {
        let mut fixtures = HashMap::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("svg") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    fixtures.insert(stem.to_string(), fs::read_to_string(&path)?);
                }
            }
        }
        Ok(MockGenerator { fixtures })
    }

    pub fn fixture_count(&self) -> usize {
        self.fixtures.len()
    }

    fn procedural(&self, prompt: &str, hash: &str) -> String {
        let mut rng = keyed_rng(&[b"generator", hash.as_bytes()]);
        let existing = prompt
            .find(EXISTING_SVG_MARKER)
            .and_then(|i| extract_svg(&prompt[i + EXISTING_SVG_MARKER.len()..]))
            .and_then(|code| parse_svg(code, ParseMode::Lenient).ok());
        let doc = match existing {
            Some(partial) => {
                let mut paths = partial.paths().to_vec();
                let extra = 1 + (hash.as_bytes()[0] % 2) as usize;
                paths.extend((0..extra).map(|_| random_shape(&mut rng)));
                partial.with_paths(paths)
            }
            None => random_document(&mut rng, 2),
        };
        format!("Here is the SVG code:\n```svg\n{}```\n", serialize_svg(&doc))
    }
}

impl GeneratorBackend for MockGenerator {
    fn complete(&self, prompt: &str, images: &[RasterImage], seed: u64, _max_tokens: u32) -> Result<String, ProviderError> {
        let hash = request_hash(prompt, images, seed);
        Ok(match self.fixtures.get(&hash) {
            Some(reply) => reply.clone(),
            None => self.procedural(prompt, &hash),
        })
    }

    fn provider(&self) -> String {
        Self::PROVIDER.into()
    }
}

/// Remote generator: POST `{prompt, images, seed, max_tokens}` → `{text}`.
#[derive(Clone, Debug)]
pub struct HttpGenerator {
    pub client: HttpClient,
}

impl HttpGenerator {
    pub fn new(client: HttpClient) -> Self {
        HttpGenerator { client }
    }
}

impl GeneratorBackend for HttpGenerator {
    fn complete(&self, prompt: &str, images: &[RasterImage], seed: u64, max_tokens: u32) -> Result<String, ProviderError> {
        let images: Vec<String> = images.iter().map(encode_png_base64).collect();
        let body = json!({ "prompt": prompt, "images": images, "seed": seed, "max_tokens": max_tokens });
        let reply = self.client.post_json("", &body)?;
        Ok(str_field(&reply, "text")?.to_string())
    }

    fn provider(&self) -> String {
        format!("http:{}", self.client.base_url)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_prompt, generate, GenerationRequest, GeneratorError, GeneratorModuleKind};
    use super::*;
    use crate::metrics::preservation_check;
    use crate::svg::SvgDocument;

    struct Canned(String);

    impl GeneratorBackend for Canned {
        fn complete(&self, _: &str, _: &[RasterImage], _: u64, _: u32) -> Result<String, ProviderError> {
            Ok(self.0.clone())
        }
        fn provider(&self) -> String {
            "canned".into()
        }
    }

    fn text_request(seed: u64) -> GenerationRequest {
        GenerationRequest::new(GeneratorModuleKind::Text2Svg, seed).with_text("a lighthouse")
    }

    fn partial() -> SvgDocument {
        parse_svg(
            r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="M 10 10 L 60 10 L 60 60 Z" fill="#112233"/></svg>"##,
            ParseMode::Strict,
        )
        .unwrap()
    }

    #[test]
    fn mock_returns_two_path_icon_deterministically() {
        let g = generate(&text_request(3), &MockGenerator::new()).unwrap();
        assert_eq!(g.document.len(), 2);
        assert_eq!(g.attempts, 1);
        assert_eq!(g, generate(&text_request(3), &MockGenerator::new()).unwrap());
        assert_ne!(g.document, generate(&text_request(4), &MockGenerator::new()).unwrap().document);
    }

    #[test]
    fn fixture_store_overrides_procedural_reply() {
        let req = text_request(9);
        let hash = request_hash(&build_prompt(&req).unwrap(), &req.images, req.seed);
        let svg = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="M 0 0 L 200 0 L 200 200 Z" fill="#000000"/></svg>"##;
        let mock = MockGenerator::new().with_fixture(hash, svg);
        let g = generate(&req, &mock).unwrap();
        assert_eq!(g.document.len(), 1);
    }

    #[test]
    fn prose_only_replies_exhaust_retries() {
        let err = generate(&text_request(0), &Canned("I cannot draw that.".into())).unwrap_err();
        match err {
            GeneratorError::GenerationInvalid { attempts, diagnostics } => {
                assert_eq!(attempts, 3);
                assert_eq!(diagnostics[0].code, "NoSvgFound");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partial_kinds_preserve_prefix() {
        let p = partial();
        let req = GenerationRequest::new(GeneratorModuleKind::Text2SvgPartial, 1)
            .with_text("a sailboat")
            .with_partial(p.clone());
        let g = generate(&req, &MockGenerator::new()).unwrap();
        assert!(g.document.len() > p.len());
        assert!(preservation_check(&p, &g.document));
    }

    #[test]
    fn dropped_partial_is_rejected() {
        let req = GenerationRequest::new(GeneratorModuleKind::Text2SvgPartial, 1)
            .with_text("a sailboat")
            .with_partial(partial());
        let reply = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="M 0 0 L 5 5 L 0 5 Z"/></svg>"##;
        let err = generate(&req, &Canned(reply.into())).unwrap_err();
        match err {
            GeneratorError::GenerationInvalid { diagnostics, .. } => assert_eq!(diagnostics[0].code, "PartialNotPreserved"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_canonical_reply_is_invalid() {
        let reply = r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 24 24"><path d="M 1 1 L 5 5 L 1 5 Z"/></svg>"#;
        let err = generate(&text_request(0), &Canned(reply.into())).unwrap_err();
        assert_eq!(err.code(), "GenerationInvalid");
    }
}
