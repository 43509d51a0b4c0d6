use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::guidance::{GuidanceBundle, Guided};
use crate::raster::{render, RasterImage};
use crate::svg::{parse_svg, serialize_svg, ParseMode};

use super::{CandidateOutcome, Pipeline, TaskKind, TaskQuery, TaskResult, WorkflowError};

/// One line of a query file. Image paths and partial-SVG paths are relative
/// to the query file; `partial_svg` may also hold inline SVG markup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryLine {
    #[serde(default)]
    pub id: Option<String>,
    pub task: TaskKind,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub image: Option<String>,
    #[serde(default)]
    pub partial_svg: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn to_query(line: QueryLine, index: usize, base: &Path, default_seed: u64) -> Result<TaskQuery, String> {
    let image = match &line.image {
        Some(path) => {
            let bytes = fs::read(resolve(base, path)).map_err(|e| format!("image {path}: {e}"))?;
            Some(RasterImage::decode(&bytes).map_err(|e| format!("image {path}: {e}"))?)
        }
        None => None,
    };
    let partial_svg = match &line.partial_svg {
        Some(value) => {
            let text = if value.trim_start().starts_with('<') {
                value.clone()
            } else {
                fs::read_to_string(resolve(base, value)).map_err(|e| format!("partial_svg {value}: {e}"))?
            };
            let doc = parse_svg(&text, ParseMode::Lenient).map_err(|e| format!("partial_svg: {e}"))?;
            Some(crate::normalize::normalize(&doc))
        }
        None => None,
    };
    Ok(TaskQuery {
        id: line.id.unwrap_or_else(|| format!("q{index:05}")),
        task: line.task,
        text: line.text,
        image,
        partial_svg,
        seed: line.seed.unwrap_or(default_seed),
    })
}

/// Reads a JSONL query file. Lines that fail to load keep their position as errors.
pub fn load_queries(path: &Path, default_seed: u64) -> io::Result<Vec<Result<TaskQuery, (String, String)>>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fallback_id = format!("q{index:05}");
        let parsed = serde_json::from_str::<QueryLine>(&line)
            .map_err(|e| (fallback_id.clone(), format!("line {}: {e}", index + 1)))
            .and_then(|q| {
                let id = q.id.clone().unwrap_or_else(|| fallback_id.clone());
                to_query(q, index, base, default_seed).map_err(|e| (id, e))
            });
        out.push(parsed);
    }
    Ok(out)
}

fn guidance_json(bundle: &GuidanceBundle) -> Value {
    let mut map = Map::new();
    let image = |g: &Guided<RasterImage>| {
        json!({
            "provider": g.provenance.provider,
            "seed": g.provenance.seed,
            "width": g.value.width(),
            "height": g.value.height(),
            "sha256": g.value.content_hash(),
        })
    };
    let text = |g: &Guided<String>| json!({ "provider": g.provenance.provider, "seed": g.provenance.seed, "text": g.value });
    if let Some(g) = &bundle.image_complete {
        map.insert("image_complete".into(), image(g));
    }
    if let Some(g) = &bundle.image_edited {
        map.insert("image_edited".into(), image(g));
    }
    if let Some(g) = &bundle.image_partial {
        map.insert("image_partial".into(), image(g));
    }
    if let Some(g) = &bundle.text_complete {
        map.insert("text_complete".into(), text(g));
    }
    if let Some(g) = &bundle.text_suggestion {
        map.insert("text_suggestion".into(), text(g));
    }
    Value::Object(map)
}

impl TaskResult {
    pub fn to_json(&self) -> Value {
        let candidates: Vec<Value> = self
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut v = json!({
                    "index": i,
                    "module": c.module,
                    "inputs": c.inputs,
                    "seed": c.seed,
                });
                match &c.outcome {
                    CandidateOutcome::Valid { score, validity, attempts, .. } => {
                        v["status"] = json!("valid");
                        v["score"] = json!(score);
                        v["attempts"] = json!(attempts);
                        v["blank_render"] = json!(validity.blank_render);
                    }
                    CandidateOutcome::Invalid { code, message } => {
                        v["status"] = json!("invalid");
                        v["error"] = json!({ "code": code, "message": message });
                    }
                }
                v
            })
            .collect();
        json!({
            "id": self.query_id,
            "task": self.task,
            "status": "ok",
            "chosen_index": self.chosen_index,
            "selection_metric": self.selection_metric,
            "scoring_reference": self.scoring_reference,
            "output_svg": serialize_svg(&self.output),
            "candidates": candidates,
            "guidance": guidance_json(&self.guidance),
        })
    }

    /// Writes candidate SVGs and renders, the output, guidance images and a score table.
    pub fn write_artifacts(&self, dir: &Path, resolution: u32) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut table = String::from("index\tmodule\tstatus\tmetric\tvalue\tchosen\n");
        for (i, c) in self.candidates.iter().enumerate() {
            let stem = format!("candidate_{i}_{}", c.module.name());
            let chosen = i == self.chosen_index;
            match &c.outcome {
                CandidateOutcome::Valid { document, score, .. } => {
                    fs::write(dir.join(format!("{stem}.svg")), serialize_svg(document))?;
                    fs::write(dir.join(format!("{stem}.png")), render(document, resolution).to_png())?;
                    table.push_str(&format!("{i}\t{}\tvalid\t{}\t{}\t{chosen}\n", c.module.name(), score.metric, score.value));
                }
                CandidateOutcome::Invalid { code, .. } => {
                    table.push_str(&format!("{i}\t{}\tinvalid:{code}\t{}\t\t{chosen}\n", c.module.name(), self.selection_metric));
                }
            }
        }
        fs::write(dir.join("scores.tsv"), table)?;
        fs::write(dir.join("output.svg"), serialize_svg(&self.output))?;
        fs::write(dir.join("output.png"), render(&self.output, resolution).to_png())?;
        let images = [
            ("image_complete", &self.guidance.image_complete),
            ("image_edited", &self.guidance.image_edited),
            ("image_partial", &self.guidance.image_partial),
        ];
        for (name, g) in images {
            if let Some(g) = g {
                fs::write(dir.join(format!("guidance_{name}.png")), g.value.to_png())?;
            }
        }
        fs::write(dir.join("guidance.json"), serde_json::to_string_pretty(&guidance_json(&self.guidance))?)?;
        Ok(())
    }
}

fn error_line(id: &str, task: Option<TaskKind>, code: &str, message: &str) -> Value {
    json!({ "id": id, "task": task, "status": "error", "error": { "code": code, "message": message } })
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Runs every query in `queries_path` and writes one JSON result per line, in
/// input order, to `out_path`. Per-query artifacts go under `artifacts` when given.
pub fn run_batch(
    pipeline: &Pipeline,
    queries_path: &Path,
    out_path: &Path,
    artifacts: Option<&Path>,
    default_seed: u64,
) -> io::Result<BatchSummary> {
    let queries = load_queries(queries_path, default_seed)?;
    run_queries(pipeline, &queries, out_path, artifacts)
}

/// Runs already loaded queries; see [`run_batch`].
pub fn run_queries(
    pipeline: &Pipeline,
    queries: &[Result<TaskQuery, (String, String)>],
    out_path: &Path,
    artifacts: Option<&Path>,
) -> io::Result<BatchSummary> {
    let lines: Vec<io::Result<(Value, bool)>> = queries
        .par_iter()
        .map(|entry| match entry {
            Err((id, msg)) => Ok((error_line(id, None, "InvalidQuery", msg), false)),
            Ok(query) => match pipeline.run(query) {
                Ok(result) => {
                    if let Some(root) = artifacts {
                        result.write_artifacts(&root.join(safe_name(&query.id)), pipeline.resolution)?;
                    }
                    Ok((result.to_json(), true))
                }
                Err(e) => Ok((error_line(&query.id, Some(query.task), e.code(), &describe(&e)), false)),
            },
        })
        .collect();

    let mut out = io::BufWriter::new(fs::File::create(out_path)?);
    let mut summary = BatchSummary::default();
    for line in lines {
        let (value, ok) = line?;
        summary.total += 1;
        if ok {
            summary.succeeded += 1;
        } else {
            summary.failed += 1;
        }
        serde_json::to_writer(&mut out, &value)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(summary)
}

fn describe(e: &WorkflowError) -> String {
    match e {
        WorkflowError::AllCandidatesInvalid { candidates } => {
            let codes: Vec<String> = candidates
                .iter()
                .map(|c| match &c.outcome {
                    CandidateOutcome::Invalid { code, .. } => format!("{}:{code}", c.module.name()),
                    CandidateOutcome::Valid { .. } => format!("{}:valid", c.module.name()),
                })
                .collect();
            format!("{e} ({})", codes.join(", "))
        }
        other => other.to_string(),
    }
}
