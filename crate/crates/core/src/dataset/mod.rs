//! Dataset curation: corpus ingestion, score filtering, partial-document
//! derivation, train/test splitting and training-record emission.

mod curate;
mod emit;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::raster::hex;
use crate::svg::{serialize_svg, SvgDocument};
use crate::synth::keyed_rng;

pub use curate::{
    curate, curate_corpus, load_corpus, CorpusEntry, CurateOptions, CurationOutcome, CurationRecord, Manifest,
    Rejection, RejectionReason, RenderPaths, CLIP_THRESHOLD,
};
pub use emit::{emit_training_records, write_jsonl, CaptionCache, TrainingFlavor, TrainingInput, TrainingRecord};

pub const DEFAULT_TEST_SIZE: usize = 500;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("document has {paths} path(s); at least 2 are needed for a partial")]
    TooFewPaths { paths: usize },
    #[error("{available} records cannot supply a test split of {requested}")]
    NotEnoughRecords { available: usize, requested: usize },
    #[error("no cached caption for record {id}")]
    MissingCaption { id: String },
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::TooFewPaths { .. } => "TooFewPaths",
            DatasetError::NotEnoughRecords { .. } => "NotEnoughRecords",
            DatasetError::MissingCaption { .. } => "MissingCaption",
            DatasetError::MalformedRecord(_) => "MalformedRecord",
            DatasetError::Io(_) => "Io",
        }
    }
}

/// Hex SHA-256 of the canonical serialization.
pub fn document_hash(doc: &SvgDocument) -> String {
    hex(&Sha256::digest(serialize_svg(doc).as_bytes()))
}

/// Prefix length drawn uniformly from `1..n` for a document of `n` paths.
pub fn partial_length(doc: &SvgDocument, seed: u64) -> Result<usize, DatasetError> {
    let n = doc.len();
    if n < 2 {
        return Err(DatasetError::TooFewPaths { paths: n });
    }
    let hash = document_hash(doc);
    let mut rng = keyed_rng(&[b"partial", hash.as_bytes(), &seed.to_le_bytes()]);
    Ok(rng.gen_range(1..n))
}

/// The first `k` paths, `k` uniform in `[1, n-1]`, deterministic per (doc, seed).
pub fn derive_partial(doc: &SvgDocument, seed: u64) -> Result<SvgDocument, DatasetError> {
    Ok(doc.prefix(partial_length(doc, seed)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded uniform sample of `test_size` ids for testing; the rest train.
/// Ids are deduplicated and sorted first so input order does not matter.
pub fn split(ids: &[String], test_size: usize, seed: u64) -> Result<Split, DatasetError> {
    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() <= test_size {
        return Err(DatasetError::NotEnoughRecords {
            available: sorted.len(),
            requested: test_size,
        });
    }
    let mut rng = keyed_rng(&[b"split", &seed.to_le_bytes()]);
    let mut in_test = vec![false; sorted.len()];
    for i in sample(&mut rng, sorted.len(), test_size) {
        in_test[i] = true;
    }
    let (test, train): (Vec<_>, Vec<_>) = sorted.into_iter().zip(in_test).partition(|(_, t)| *t);
    Ok(Split {
        train: train.into_iter().map(|(id, _)| id).collect(),
        test: test.into_iter().map(|(id, _)| id).collect(),
    })
}
