use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

use crate::normalize::CANONICAL_SIDE;
use crate::raster::render;
use crate::svg::{parse_svg_raw, serialize_path, ParseMode, SvgDocument, ViewBox};

pub const VALIDITY_RESOLUTION: u32 = 224;

const ALLOWED_LETTERS: [char; 6] = ['M', 'L', 'C', 'Q', 'A', 'Z'];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    #[serde(with = "flag")]
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub blank_render: bool,
}

/// Serializes the validity flag as 0/1.
mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("validity flag must be 0 or 1, got {other}"))),
        }
    }
}

impl ValidityReport {
    pub fn flag(&self) -> u8 {
        self.valid as u8
    }

    fn invalid(diagnostics: Vec<Diagnostic>) -> Self {
        ValidityReport {
            valid: false,
            diagnostics,
            blank_render: false,
        }
    }
}

/// Checks that `code` is a renderable document in canonical form.
pub fn check_svg(code: &str) -> ValidityReport {
    let parsed = match parse_svg_raw(code, ParseMode::Strict) {
        Ok(p) => p,
        Err(e) => return ValidityReport::invalid(vec![Diagnostic::new(e.code(), e.to_string())]),
    };

    let mut diagnostics = Vec::new();
    for (i, path) in parsed.paths.iter().enumerate() {
        for cmd in &path.commands {
            if !ALLOWED_LETTERS.contains(&cmd.letter) {
                diagnostics.push(Diagnostic::new(
                    "DisallowedCommand",
                    format!("path {i} uses command {} outside M, L, C, Q, A, Z", cmd.letter),
                ));
            }
        }
    }
    if parsed.view_box != ViewBox::square(CANONICAL_SIDE) {
        let vb = parsed.view_box;
        diagnostics.push(Diagnostic::new(
            "ViewBoxNotCanonical",
            format!("viewBox is {} {} {} {}, expected 0 0 200 200", vb.min_x, vb.min_y, vb.width, vb.height),
        ));
    }
    if !diagnostics.is_empty() {
        return ValidityReport::invalid(diagnostics);
    }

    let doc = match parsed.lower() {
        Ok(d) => d,
        Err(e) => return ValidityReport::invalid(vec![Diagnostic::new(e.code(), e.to_string())]),
    };
    let finite = doc
        .paths()
        .iter()
        .all(|p| p.commands().iter().all(|c| c.is_finite()) && p.style().stroke_width.is_finite());
    if !finite {
        return ValidityReport::invalid(vec![Diagnostic::new("NonFiniteNumber", "coordinates are not finite")]);
    }

    match catch_unwind(AssertUnwindSafe(|| render(&doc, VALIDITY_RESOLUTION))) {
        Ok(img) => ValidityReport {
            valid: true,
            diagnostics: Vec::new(),
            blank_render: img.is_all_white(),
        },
        Err(_) => ValidityReport::invalid(vec![Diagnostic::new("RenderFailed", "rendering aborted")]),
    }
}

/// True iff `output` begins with the paths of `partial`, compared by canonical text.
pub fn preservation_check(partial: &SvgDocument, output: &SvgDocument) -> bool {
    partial.len() <= output.len()
        && partial
            .paths()
            .iter()
            .zip(output.paths())
            .all(|(a, b)| serialize_path(a) == serialize_path(b))
}
