use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::guidance::{GuidanceError, GuidanceTools};
use crate::raster::render;
use crate::svg::serialize_svg;

use super::{CurationRecord, DatasetError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingFlavor {
    DI2s,
    DT2s,
    DIt2s,
    DpT2s,
    DpIt2s,
}

impl TrainingFlavor {
    pub const ALL: [TrainingFlavor; 5] = [
        TrainingFlavor::DI2s,
        TrainingFlavor::DT2s,
        TrainingFlavor::DIt2s,
        TrainingFlavor::DpT2s,
        TrainingFlavor::DpIt2s,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainingFlavor::DI2s => "d_i2s",
            TrainingFlavor::DT2s => "d_t2s",
            TrainingFlavor::DIt2s => "d_it2s",
            TrainingFlavor::DpT2s => "dp_t2s",
            TrainingFlavor::DpIt2s => "dp_it2s",
        }
    }

    pub fn parse(name: &str) -> Option<TrainingFlavor> {
        TrainingFlavor::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn is_partial(self) -> bool {
        matches!(self, TrainingFlavor::DpT2s | TrainingFlavor::DpIt2s)
    }

    fn uses_image(self) -> bool {
        matches!(self, TrainingFlavor::DI2s | TrainingFlavor::DIt2s | TrainingFlavor::DpIt2s)
    }

    fn uses_text(self) -> bool {
        self != TrainingFlavor::DI2s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_svg_text: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub id: String,
    pub flavor: TrainingFlavor,
    pub input: TrainingInput,
    pub output: String,
}

/// Captions of complete renders keyed by image hash.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaptionCache {
    entries: BTreeMap<String, String>,
}

impl CaptionCache {
    pub fn new() -> Self {
        CaptionCache::default()
    }

    pub fn get(&self, image_hash: &str) -> Option<&str> {
        self.entries.get(image_hash).map(String::as_str)
    }

    pub fn insert(&mut self, image_hash: impl Into<String>, caption: impl Into<String>) {
        self.entries.insert(image_hash.into(), caption.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Captions every record whose render is not cached yet. Returns how many
    /// new captions were produced.
    pub fn fill(
        &mut self,
        records: &[CurationRecord],
        guidance: &dyn GuidanceTools,
        resolution: u32,
        seed: u64,
    ) -> Result<usize, GuidanceError> {
        let mut added = 0;
        for r in records {
            if self.entries.contains_key(&r.image_hash) {
                continue;
            }
            let image = render(&r.complete_svg, resolution);
            let caption = guidance.caption_image(&image, seed)?;
            self.entries.insert(r.image_hash.clone(), caption);
            added += 1;
        }
        Ok(added)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        if !path.exists() {
            return Ok(CaptionCache::default());
        }
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| DatasetError::MalformedRecord(format!("caption cache: {e}")))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)
    }
}

fn image_ref(record: &CurationRecord) -> String {
    match &record.render_paths {
        Some(p) => p.complete.clone(),
        None => format!("{}_complete.png", record.id),
    }
}

/// One training record per curated record. Partial flavors skip records
/// without a partial (single-path documents), so their output can be shorter.
pub fn emit_training_records(
    records: &[CurationRecord],
    flavor: TrainingFlavor,
    captions: &CaptionCache,
) -> Result<Vec<TrainingRecord>, DatasetError> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let partial = match (&r.partial_svg, flavor.is_partial()) {
            (Some(p), true) => Some(serialize_svg(p)),
            (None, true) => continue,
            (_, false) => None,
        };
        let aux_text = if flavor == TrainingFlavor::DIt2s {
            let caption = captions
                .get(&r.image_hash)
                .ok_or_else(|| DatasetError::MissingCaption { id: r.id.clone() })?;
            Some(caption.to_string())
        } else {
            None
        };
        out.push(TrainingRecord {
            id: r.id.clone(),
            flavor,
            input: TrainingInput {
                image: flavor.uses_image().then(|| image_ref(r)),
                text: flavor.uses_text().then(|| r.text.clone()),
                aux_text,
                partial_svg_text: partial,
            },
            output: serialize_svg(&r.complete_svg),
        });
    }
    Ok(out)
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
