use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::metrics::{clip_score, EmbeddingPort};
use crate::normalize::normalize;
use crate::raster::{hex, render, DEFAULT_RESOLUTION};
use crate::svg::{parse_svg, parse_svg_raw, serialize_svg, ParseMode, SvgDocument};

use super::{derive_partial, DatasetError};

/// Records are kept only when their score is strictly above this.
pub const CLIP_THRESHOLD: f64 = 20.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CurateOptions {
    pub threshold: f64,
    pub resolution: u32,
    /// Reject single-path documents instead of keeping them without a partial.
    pub require_partial: bool,
    /// Where to write `<id>_complete.png` and `<id>_partial.png`.
    pub render_dir: Option<PathBuf>,
}

impl Default for CurateOptions {
    fn default() -> Self {
        CurateOptions {
            threshold: CLIP_THRESHOLD,
            resolution: DEFAULT_RESOLUTION,
            require_partial: false,
            render_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderPaths {
    pub complete: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurationRecord {
    pub id: String,
    pub complete_svg: SvgDocument,
    /// `None` for single-path documents, which only feed the basic flavors.
    pub partial_svg: Option<SvgDocument>,
    pub text: String,
    pub clip_score: f64,
    pub provider: String,
    /// SHA-256 of the complete render, the caption cache key.
    pub image_hash: String,
    pub render_paths: Option<RenderPaths>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    text: String,
    clip_score: f64,
    provider: String,
    image_sha256: String,
    complete_svg: String,
    partial_svg: Option<String>,
    #[serde(default)]
    renders: Option<RenderPaths>,
}

impl CurationRecord {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(RecordLine {
            id: self.id.clone(),
            text: self.text.clone(),
            clip_score: self.clip_score,
            provider: self.provider.clone(),
            image_sha256: self.image_hash.clone(),
            complete_svg: serialize_svg(&self.complete_svg),
            partial_svg: self.partial_svg.as_ref().map(serialize_svg),
            renders: self.render_paths.clone(),
        })
        .expect("record fields serialize")
    }

    pub fn from_json(value: &Value) -> Result<Self, DatasetError> {
        let line: RecordLine =
            serde_json::from_value(value.clone()).map_err(|e| DatasetError::MalformedRecord(e.to_string()))?;
        let parse = |s: &str| parse_svg(s, ParseMode::Strict).map_err(|e| DatasetError::MalformedRecord(e.to_string()));
        Ok(CurationRecord {
            complete_svg: parse(&line.complete_svg)?,
            partial_svg: line.partial_svg.as_deref().map(parse).transpose()?,
            id: line.id,
            text: line.text,
            clip_score: line.clip_score,
            provider: line.provider,
            image_hash: line.image_sha256,
            render_paths: line.renders,
        })
    }

    /// Reads a JSONL file written by [`super::write_jsonl`].
    pub fn load_jsonl(path: &Path) -> Result<Vec<Self>, DatasetError> {
        let text = fs::read_to_string(path)?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let v: Value = serde_json::from_str(l).map_err(|e| DatasetError::MalformedRecord(e.to_string()))?;
                CurationRecord::from_json(&v)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RejectionReason {
    ParseFailed,
    NormalizeFailed,
    ScoreBelowThreshold,
    TooFewPaths,
    /// The embedding provider failed; the input was not judged.
    ScoringFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl Rejection {
    fn new(reason: RejectionReason, detail: impl Into<String>) -> Self {
        Rejection {
            reason,
            detail: detail.into(),
            score: None,
        }
    }
}

fn record_id(doc: &SvgDocument, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(serialize_svg(doc).as_bytes());
    h.update([0]);
    h.update(text.as_bytes());
    hex(&h.finalize())[..16].to_string()
}

/// Parses, normalizes, renders and scores one source document.
pub fn curate(
    raw_svg: &str,
    text: &str,
    embedder: &dyn EmbeddingPort,
    seed: u64,
    opts: &CurateOptions,
) -> Result<CurationRecord, Rejection> {
    let parsed = parse_svg_raw(raw_svg, ParseMode::Lenient)
        .map_err(|e| Rejection::new(RejectionReason::ParseFailed, e.to_string()))?;
    let doc = parsed
        .lower()
        .map_err(|e| Rejection::new(RejectionReason::NormalizeFailed, e.to_string()))?;
    if doc.is_empty() {
        return Err(Rejection::new(RejectionReason::NormalizeFailed, "document has no drawable paths"));
    }
    let complete = normalize(&doc);
    let image = render(&complete, opts.resolution);
    let score = clip_score(text, &image, embedder)
        .map_err(|e| Rejection::new(RejectionReason::ScoringFailed, e.to_string()))?;
    if !(score.value > opts.threshold) {
        return Err(Rejection {
            reason: RejectionReason::ScoreBelowThreshold,
            detail: format!("score {} does not exceed {}", score.value, opts.threshold),
            score: Some(score.value),
        });
    }
    let partial = match derive_partial(&complete, seed) {
        Ok(p) => Some(p),
        Err(DatasetError::TooFewPaths { .. }) if !opts.require_partial => None,
        Err(e) => return Err(Rejection::new(RejectionReason::TooFewPaths, e.to_string())),
    };

    let id = record_id(&complete, text);
    let render_paths = match &opts.render_dir {
        Some(dir) => {
            let write = |name: String, img: &crate::raster::RasterImage| -> Result<String, Rejection> {
                fs::create_dir_all(dir)
                    .and_then(|_| fs::write(dir.join(&name), img.to_png()))
                    .map_err(|e| Rejection::new(RejectionReason::ScoringFailed, format!("writing render: {e}")))?;
                Ok(name)
            };
            let complete_name = write(format!("{id}_complete.png"), &image)?;
            let partial_name = match &partial {
                Some(p) => Some(write(format!("{id}_partial.png"), &render(p, opts.resolution))?),
                None => None,
            };
            Some(RenderPaths {
                complete: complete_name,
                partial: partial_name,
            })
        }
        None => None,
    };
    Ok(CurationRecord {
        id,
        image_hash: image.content_hash(),
        complete_svg: complete,
        partial_svg: partial,
        text: text.to_string(),
        clip_score: score.value,
        provider: score.provider.unwrap_or_default(),
        render_paths,
    })
}

/// A source document and its description.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    /// Path relative to the corpus root, `/`-separated.
    pub file: String,
    pub raw_svg: String,
    pub text: String,
}

fn collect_svgs(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_svgs(root, &path, out)?;
        } else if path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("svg")) {
            out.push(path);
        }
    }
    Ok(())
}

/// Reads every `.svg` below `root` and pairs it with its description from the
/// metadata JSON object (`{"relative/path.svg": "text", ...}`). Returns the
/// entries sorted by path and the files that had no description.
pub fn load_corpus(root: &Path, metadata: &Path) -> Result<(Vec<CorpusEntry>, Vec<String>), DatasetError> {
    let meta: HashMap<String, String> = serde_json::from_str(&fs::read_to_string(metadata)?)
        .map_err(|e| DatasetError::MalformedRecord(format!("metadata: {e}")))?;
    let mut files = Vec::new();
    collect_svgs(root, root, &mut files)?;
    let mut entries = Vec::new();
    let mut unlabeled = Vec::new();
    for path in files {
        let rel = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        match meta.get(&rel) {
            Some(text) => entries.push(CorpusEntry {
                raw_svg: fs::read_to_string(&path)?,
                file: rel,
                text: text.clone(),
            }),
            None => unlabeled.push(rel),
        }
    }
    entries.sort_by(|a, b| a.file.cmp(&b.file));
    unlabeled.sort();
    Ok((entries, unlabeled))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub inputs: usize,
    pub retained: usize,
    pub rejected: BTreeMap<String, usize>,
    #[serde(default)]
    pub unlabeled: usize,
    #[serde(default)]
    pub duplicates: usize,
    pub threshold: f64,
    pub seed: u64,
    pub provider: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurationOutcome {
    /// Retained records sorted by id, one per id.
    pub records: Vec<CurationRecord>,
    /// `(file, rejection)` in corpus order.
    pub rejections: Vec<(String, Rejection)>,
    pub manifest: Manifest,
}

/// Curates every entry in parallel; output order is independent of scheduling.
pub fn curate_corpus(
    entries: &[CorpusEntry],
    embedder: &dyn EmbeddingPort,
    seed: u64,
    opts: &CurateOptions,
) -> CurationOutcome {
    let results: Vec<Result<CurationRecord, Rejection>> = entries
        .par_iter()
        .map(|e| curate(&e.raw_svg, &e.text, embedder, seed, opts))
        .collect();
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let mut rejected: BTreeMap<String, usize> = BTreeMap::new();
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(r) => records.push(r),
            Err(rej) => {
                *rejected.entry(format!("{:?}", rej.reason)).or_default() += 1;
                rejections.push((entry.file.clone(), rej));
            }
        }
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let before = records.len();
    records.dedup_by(|a, b| a.id == b.id);
    let manifest = Manifest {
        inputs: entries.len(),
        retained: records.len(),
        rejected,
        unlabeled: 0,
        duplicates: before - records.len(),
        threshold: opts.threshold,
        seed,
        provider: embedder.provider(),
    };
    CurationOutcome {
        records,
        rejections,
        manifest,
    }
}
