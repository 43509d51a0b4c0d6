//! SVG generator modules: prompt construction, backend ports and
//! validity-gated generation.

mod backend;
mod extract;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{check_svg, preservation_check, Diagnostic};
use crate::normalize::normalize;
use crate::provider::ProviderError;
use crate::raster::RasterImage;
use crate::svg::{parse_svg, serialize_svg, ParseMode, SvgDocument};
use crate::synth::keyed_rng;

pub use backend::{request_hash, GeneratorBackend, HttpGenerator, MockGenerator};
pub use extract::extract_svg;

/// Retries after the first attempt when the output fails validation.
pub const MAX_RETRIES: u32 = 2;
pub const DEFAULT_MAX_TOKENS: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorModuleKind {
    #[serde(rename = "image2svg")]
    Image2Svg,
    #[serde(rename = "text2svg")]
    Text2Svg,
    #[serde(rename = "imagetext2svg")]
    ImageText2Svg,
    #[serde(rename = "text2svg_partial")]
    Text2SvgPartial,
    #[serde(rename = "imagetext2svg_partial")]
    ImageText2SvgPartial,
}

impl GeneratorModuleKind {
    pub const ALL: [GeneratorModuleKind; 5] = [
        GeneratorModuleKind::Image2Svg,
        GeneratorModuleKind::Text2Svg,
        GeneratorModuleKind::ImageText2Svg,
        GeneratorModuleKind::Text2SvgPartial,
        GeneratorModuleKind::ImageText2SvgPartial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorModuleKind::Image2Svg => "image2svg",
            GeneratorModuleKind::Text2Svg => "text2svg",
            GeneratorModuleKind::ImageText2Svg => "imagetext2svg",
            GeneratorModuleKind::Text2SvgPartial => "text2svg_partial",
            GeneratorModuleKind::ImageText2SvgPartial => "imagetext2svg_partial",
        }
    }

    pub fn needs_image(self) -> bool {
        !matches!(self, GeneratorModuleKind::Text2Svg | GeneratorModuleKind::Text2SvgPartial)
    }

    pub fn needs_text(self) -> bool {
        self != GeneratorModuleKind::Image2Svg
    }

    pub fn is_partial(self) -> bool {
        matches!(self, GeneratorModuleKind::Text2SvgPartial | GeneratorModuleKind::ImageText2SvgPartial)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRequest {
    pub kind: GeneratorModuleKind,
    pub text: Option<String>,
    /// Extra description appended to `text` (a caption or suggestion).
    pub aux_text: Option<String>,
    pub images: Vec<RasterImage>,
    pub partial_svg: Option<SvgDocument>,
    pub seed: u64,
}

impl GenerationRequest {
    pub fn new(kind: GeneratorModuleKind, seed: u64) -> Self {
        GenerationRequest {
            kind,
            text: None,
            aux_text: None,
            images: Vec::new(),
            partial_svg: None,
            seed,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_aux_text(mut self, text: impl Into<String>) -> Self {
        self.aux_text = Some(text.into());
        self
    }

    pub fn with_image(mut self, image: RasterImage) -> Self {
        self.images.push(image);
        self
    }

    pub fn with_partial(mut self, partial: SvgDocument) -> Self {
        self.partial_svg = Some(partial);
        self
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let missing = |input| {
            Err(GeneratorError::MissingRequiredInput {
                kind: self.kind,
                input,
            })
        };
        if self.kind.needs_image() && self.images.is_empty() {
            return missing("image");
        }
        if self.kind.needs_text() && self.text.as_deref().map_or(true, |t| t.trim().is_empty()) {
            return missing("text");
        }
        if self.kind.is_partial() && self.partial_svg.is_none() {
            return missing("partial_svg");
        }
        Ok(())
    }

    fn description(&self) -> String {
        let text = self.text.as_deref().unwrap_or_default();
        match self.aux_text.as_deref().filter(|a| !a.trim().is_empty()) {
            Some(aux) => format!("{text}\n{aux}"),
            None => text.to_string(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("{} request is missing its {input}", kind.name())]
    MissingRequiredInput {
        kind: GeneratorModuleKind,
        input: &'static str,
    },
    #[error("no valid SVG after {attempts} attempts")]
    GenerationInvalid {
        attempts: u32,
        diagnostics: Vec<Diagnostic>,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

impl GeneratorError {
    pub fn code(&self) -> &'static str {
        match self {
            GeneratorError::MissingRequiredInput { .. } => "MissingRequiredInput",
            GeneratorError::GenerationInvalid { .. } => "GenerationInvalid",
            GeneratorError::Provider(e) => e.code(),
        }
    }
}

pub const PARTIAL_PROMPT_PREFIX: &str = "Please complete the SVG code so that it fully represents the following description. Make sure to include the existing SVG code in the final result.";
pub const EXISTING_SVG_MARKER: &str = "Existing SVG code: ";

/// Instruction text sent to the generator for `req`.
pub fn build_prompt(req: &GenerationRequest) -> Result<String, GeneratorError> {
    req.validate()?;
    let description = req.description();
    Ok(match req.kind {
        GeneratorModuleKind::Image2Svg => "Convert this raster image to SVG code.".to_string(),
        GeneratorModuleKind::Text2Svg => {
            format!("Generate an SVG illustration from the given description: {description}")
        }
        GeneratorModuleKind::ImageText2Svg => {
            format!("Convert this raster image to SVG code with the following description: {description}")
        }
        GeneratorModuleKind::Text2SvgPartial | GeneratorModuleKind::ImageText2SvgPartial => {
            let partial = serialize_svg(req.partial_svg.as_ref().expect("validated"));
            format!(
                "{PARTIAL_PROMPT_PREFIX}\nDescription: {description}. {EXISTING_SVG_MARKER}{}",
                partial.trim_end()
            )
        }
    })
}

/// Seed for attempt `attempt` (0 = the request seed).
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        return seed;
    }
    use rand::RngCore;
    keyed_rng(&[b"retry", &seed.to_le_bytes(), &attempt.to_le_bytes()]).next_u64()
}

/// A generated, validated and normalized document.
#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    pub document: SvgDocument,
    /// Attempts used, 1 to `MAX_RETRIES + 1`.
    pub attempts: u32,
    pub seed: u64,
    pub blank_render: bool,
}

fn check_attempt(req: &GenerationRequest, reply: &str) -> Result<(SvgDocument, bool), Vec<Diagnostic>> {
    let code = extract_svg(reply).ok_or_else(|| {
        vec![Diagnostic {
            code: "NoSvgFound".into(),
            message: "reply contains no well-formed <svg> element".into(),
        }]
    })?;
    let report = check_svg(code);
    if !report.valid {
        return Err(report.diagnostics);
    }
    let doc = parse_svg(code, ParseMode::Strict).map_err(|e| {
        vec![Diagnostic {
            code: e.code().into(),
            message: e.to_string(),
        }]
    })?;
    let doc = normalize(&doc);
    if let Some(partial) = req.partial_svg.as_ref().filter(|_| req.kind.is_partial()) {
        if !preservation_check(partial, &doc) {
            return Err(vec![Diagnostic {
                code: "PartialNotPreserved".into(),
                message: format!("output does not begin with the {} partial paths", partial.len()),
            }]);
        }
    }
    Ok((doc, report.blank_render))
}

/// Prompts the backend and returns the first valid document, retrying with a
/// fresh seed up to [`MAX_RETRIES`] times.
pub fn generate(req: &GenerationRequest, backend: &dyn GeneratorBackend) -> Result<Generation, GeneratorError> {
    let prompt = build_prompt(req)?;
    let mut diagnostics = Vec::new();
    for attempt in 0..=MAX_RETRIES {
        let seed = attempt_seed(req.seed, attempt);
        let reply = backend.complete(&prompt, &req.images, seed, DEFAULT_MAX_TOKENS)?;
        match check_attempt(req, &reply) {
            Ok((document, blank_render)) => {
                return Ok(Generation {
                    document,
                    attempts: attempt + 1,
                    seed,
                    blank_render,
                })
            }
            Err(d) => diagnostics = d,
        }
    }
    Err(GeneratorError::GenerationInvalid {
        attempts: MAX_RETRIES + 1,
        diagnostics,
    })
}
