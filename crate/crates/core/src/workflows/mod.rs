//! The four task workflows: gather guidance, generate candidates with the
//! generator modules, score them and keep the best.

mod batch;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{generate, GenerationRequest, GeneratorBackend, GeneratorError, GeneratorModuleKind, MockGenerator};
use crate::guidance::{GuidanceBundle, GuidanceError, GuidanceTools, Guided, MockGuidance};
use crate::metrics::{
    check_svg, clip_score, select_best, ssim, EmbeddingPort, HistogramEmbedder, Metric, MetricError, Score,
    ValidityReport,
};
use crate::raster::{render, RasterImage, DEFAULT_RESOLUTION};
use crate::svg::{serialize_svg, SvgDocument};
use crate::synth::keyed_rng;

pub use batch::{load_queries, run_batch, run_queries, BatchSummary, QueryLine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "text_to_svg")]
    TextToSvg,
    #[serde(rename = "image_to_svg")]
    ImageToSvg,
    #[serde(rename = "partialsvg_to_svg")]
    PartialSvgToSvg,
    #[serde(rename = "partialimage_to_svg")]
    PartialImageToSvg,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::TextToSvg,
        TaskKind::ImageToSvg,
        TaskKind::PartialSvgToSvg,
        TaskKind::PartialImageToSvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::TextToSvg => "text_to_svg",
            TaskKind::ImageToSvg => "image_to_svg",
            TaskKind::PartialSvgToSvg => "partialsvg_to_svg",
            TaskKind::PartialImageToSvg => "partialimage_to_svg",
        }
    }

    pub fn parse(name: &str) -> Option<TaskKind> {
        TaskKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Number of candidates the task generates.
    pub fn candidate_count(self) -> usize {
        match self {
            TaskKind::TextToSvg | TaskKind::PartialImageToSvg => 3,
            TaskKind::ImageToSvg | TaskKind::PartialSvgToSvg => 2,
        }
    }

    pub fn selection_metric(self) -> Metric {
        match self {
            TaskKind::TextToSvg | TaskKind::PartialSvgToSvg => Metric::ClipScore,
            TaskKind::ImageToSvg | TaskKind::PartialImageToSvg => Metric::Ssim,
        }
    }

    /// What candidates are scored against.
    pub fn scoring_reference(self) -> &'static str {
        match self {
            TaskKind::TextToSvg | TaskKind::PartialSvgToSvg => "text",
            TaskKind::ImageToSvg => "image",
            TaskKind::PartialImageToSvg => "image_edited",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskQuery {
    pub id: String,
    pub task: TaskKind,
    pub text: Option<String>,
    /// The complete image for image_to_svg, the partial image for partialimage_to_svg.
    pub image: Option<RasterImage>,
    pub partial_svg: Option<SvgDocument>,
    pub seed: u64,
}

impl TaskQuery {
    pub fn text_to_svg(id: impl Into<String>, text: impl Into<String>, seed: u64) -> Self {
        TaskQuery { id: id.into(), task: TaskKind::TextToSvg, text: Some(text.into()), image: None, partial_svg: None, seed }
    }

    pub fn image_to_svg(id: impl Into<String>, image: RasterImage, seed: u64) -> Self {
        TaskQuery { id: id.into(), task: TaskKind::ImageToSvg, text: None, image: Some(image), partial_svg: None, seed }
    }

    pub fn partialsvg_to_svg(id: impl Into<String>, text: impl Into<String>, partial: SvgDocument, seed: u64) -> Self {
        TaskQuery {
            id: id.into(),
            task: TaskKind::PartialSvgToSvg,
            text: Some(text.into()),
            image: None,
            partial_svg: Some(partial),
            seed,
        }
    }

    pub fn partialimage_to_svg(id: impl Into<String>, text: impl Into<String>, partial_image: RasterImage, seed: u64) -> Self {
        TaskQuery {
            id: id.into(),
            task: TaskKind::PartialImageToSvg,
            text: Some(text.into()),
            image: Some(partial_image),
            partial_svg: None,
            seed,
        }
    }

    fn require_text(&self) -> Result<&str, WorkflowError> {
        self.text
            .as_deref()
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| WorkflowError::InvalidQuery(format!("{} needs text", self.task.name())))
    }

    fn require_image(&self) -> Result<&RasterImage, WorkflowError> {
        self.image
            .as_ref()
            .ok_or_else(|| WorkflowError::InvalidQuery(format!("{} needs an image", self.task.name())))
    }

    fn require_partial(&self) -> Result<&SvgDocument, WorkflowError> {
        self.partial_svg
            .as_ref()
            .ok_or_else(|| WorkflowError::InvalidQuery(format!("{} needs a partial SVG", self.task.name())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CandidateOutcome {
    Valid {
        document: SvgDocument,
        score: Score,
        validity: ValidityReport,
        attempts: u32,
    },
    Invalid {
        code: String,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub module: GeneratorModuleKind,
    /// Query and guidance fields fed to the module, in argument order.
    pub inputs: Vec<&'static str>,
    pub seed: u64,
    pub outcome: CandidateOutcome,
}

impl Candidate {
    pub fn document(&self) -> Option<&SvgDocument> {
        match &self.outcome {
            CandidateOutcome::Valid { document, .. } => Some(document),
            CandidateOutcome::Invalid { .. } => None,
        }
    }

    pub fn score(&self) -> Option<&Score> {
        match &self.outcome {
            CandidateOutcome::Valid { score, .. } => Some(score),
            CandidateOutcome::Invalid { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskResult {
    pub query_id: String,
    pub task: TaskKind,
    /// Every candidate in module order, valid or not.
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the selected one.
    pub chosen_index: usize,
    pub guidance: GuidanceBundle,
    pub output: SvgDocument,
    pub selection_metric: Metric,
    pub scoring_reference: &'static str,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WorkflowError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("guidance failed: {0}")]
    Guidance(#[from] GuidanceError),
    #[error("scoring failed: {0}")]
    Scoring(#[from] MetricError),
    #[error("all {} candidates are invalid", candidates.len())]
    AllCandidatesInvalid { candidates: Vec<Candidate> },
}

impl WorkflowError {
    pub fn code(&self) -> &'static str {
        match self {
            WorkflowError::InvalidQuery(_) => "InvalidQuery",
            WorkflowError::Guidance(e) => e.code(),
            WorkflowError::Scoring(e) => e.code(),
            WorkflowError::AllCandidatesInvalid { .. } => "AllCandidatesInvalid",
        }
    }
}

/// The backends a workflow runs against.
#[derive(Clone)]
pub struct Pipeline {
    pub guidance: Arc<dyn GuidanceTools>,
    pub generator: Arc<dyn GeneratorBackend>,
    pub embedder: Arc<dyn EmbeddingPort>,
    /// Resolution for candidate renders and reference images.
    pub resolution: u32,
}

/// One planned generator call.
struct Plan {
    module: GeneratorModuleKind,
    inputs: Vec<&'static str>,
    request: GenerationRequest,
}

fn candidate_seed(query_seed: u64, index: usize) -> u64 {
    use rand::RngCore;
    keyed_rng(&[b"candidate", &query_seed.to_le_bytes(), &(index as u64).to_le_bytes()]).next_u64()
}

impl Pipeline {
    pub fn new(
        guidance: Arc<dyn GuidanceTools>,
        generator: Arc<dyn GeneratorBackend>,
        embedder: Arc<dyn EmbeddingPort>,
    ) -> Self {
        Pipeline {
            guidance,
            generator,
            embedder,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    /// Offline stack: mock guidance, mock generator and histogram embedder.
    pub fn mock() -> Self {
        Pipeline::new(
            Arc::new(MockGuidance::new(DEFAULT_RESOLUTION)),
            Arc::new(MockGenerator::new()),
            Arc::new(HistogramEmbedder),
        )
    }

    fn guided<T>(&self, value: T, seed: u64) -> Guided<T> {
        Guided::new(value, self.guidance.provider(), seed)
    }

    pub fn run(&self, query: &TaskQuery) -> Result<TaskResult, WorkflowError> {
        match query.task {
            TaskKind::TextToSvg => self.run_text_to_svg(query),
            TaskKind::ImageToSvg => self.run_image_to_svg(query),
            TaskKind::PartialSvgToSvg => self.run_partialsvg_to_svg(query),
            TaskKind::PartialImageToSvg => self.run_partialimage_to_svg(query),
        }
    }

    pub fn run_text_to_svg(&self, query: &TaskQuery) -> Result<TaskResult, WorkflowError> {
        let text = query.require_text()?;
        let g_ic = self.guidance.text_to_image(text, query.seed)?;
        use GeneratorModuleKind::*;
        let plans = vec![
            self.plan(query, 0, Image2Svg, &["image_complete"], |r| r.with_image(g_ic.clone())),
            self.plan(query, 1, Text2Svg, &["text"], |r| r.with_text(text)),
            self.plan(query, 2, ImageText2Svg, &["text", "image_complete"], |r| {
                r.with_text(text).with_image(g_ic.clone())
            }),
        ];
        let guidance = GuidanceBundle {
            image_complete: Some(self.guided(g_ic, query.seed)),
            ..GuidanceBundle::default()
        };
        self.finish(query, plans, guidance, &Reference::Text(text))
    }

    pub fn run_image_to_svg(&self, query: &TaskQuery) -> Result<TaskResult, WorkflowError> {
        let image = query.require_image()?;
        let g_tc = self.guidance.caption_image(image, query.seed)?;
        use GeneratorModuleKind::*;
        let plans = vec![
            self.plan(query, 0, Image2Svg, &["image"], |r| r.with_image(image.clone())),
            self.plan(query, 1, ImageText2Svg, &["image", "text_complete"], |r| {
                r.with_image(image.clone()).with_text(g_tc.as_str())
            }),
        ];
        let guidance = GuidanceBundle {
            text_complete: Some(self.guided(g_tc, query.seed)),
            ..GuidanceBundle::default()
        };
        let reference = image.resample_letterbox(self.resolution);
        self.finish(query, plans, guidance, &Reference::Image(&reference))
    }

    pub fn run_partialsvg_to_svg(&self, query: &TaskQuery) -> Result<TaskResult, WorkflowError> {
        let text = query.require_text()?;
        let partial = query.require_partial()?;
        let i_p = render(partial, self.resolution);
        let g_ie = self.guidance.edit_image(&i_p, text, query.seed)?;
        use GeneratorModuleKind::*;
        let plans = vec![
            self.plan(query, 0, Text2SvgPartial, &["text", "partial_svg"], |r| {
                r.with_text(text).with_partial(partial.clone())
            }),
            self.plan(query, 1, ImageText2SvgPartial, &["image_edited", "text", "partial_svg"], |r| {
                r.with_image(g_ie.clone()).with_text(text).with_partial(partial.clone())
            }),
        ];
        let guidance = GuidanceBundle {
            image_partial: Some(Guided::new(i_p, "render", query.seed)),
            image_edited: Some(self.guided(g_ie, query.seed)),
            ..GuidanceBundle::default()
        };
        self.finish(query, plans, guidance, &Reference::Text(text))
    }

    pub fn run_partialimage_to_svg(&self, query: &TaskQuery) -> Result<TaskResult, WorkflowError> {
        let text = query.require_text()?;
        let i_p = query.require_image()?;
        let (g_ie, g_tp) = rayon::join(
            || self.guidance.edit_image(i_p, text, query.seed),
            || self.guidance.suggest_completion(text, i_p, query.seed),
        );
        let (g_ie, g_tp) = (g_ie?, g_tp?);
        use GeneratorModuleKind::*;
        let plans = vec![
            self.plan(query, 0, Image2Svg, &["image_edited"], |r| r.with_image(g_ie.clone())),
            self.plan(query, 1, ImageText2Svg, &["image_edited", "text"], |r| {
                r.with_image(g_ie.clone()).with_text(text)
            }),
            self.plan(query, 2, ImageText2Svg, &["image", "text", "text_suggestion"], |r| {
                r.with_image(i_p.clone()).with_text(text).with_aux_text(g_tp.as_str())
            }),
        ];
        let reference = if g_ie.width() == g_ie.height() {
            g_ie.clone()
        } else {
            g_ie.resample_letterbox(self.resolution)
        };
        let guidance = GuidanceBundle {
            image_edited: Some(self.guided(g_ie, query.seed)),
            text_suggestion: Some(self.guided(g_tp, query.seed)),
            ..GuidanceBundle::default()
        };
        self.finish(query, plans, guidance, &Reference::Image(&reference))
    }

    fn plan(
        &self,
        query: &TaskQuery,
        index: usize,
        module: GeneratorModuleKind,
        inputs: &[&'static str],
        build: impl FnOnce(GenerationRequest) -> GenerationRequest,
    ) -> Plan {
        Plan {
            module,
            inputs: inputs.to_vec(),
            request: build(GenerationRequest::new(module, candidate_seed(query.seed, index))),
        }
    }

    fn score(&self, doc: &SvgDocument, reference: &Reference) -> Result<Score, MetricError> {
        match reference {
            Reference::Text(text) => clip_score(text, &render(doc, self.resolution), self.embedder.as_ref()),
            Reference::Image(image) => ssim(&render(doc, image.width()), image),
        }
    }

    fn finish(
        &self,
        query: &TaskQuery,
        plans: Vec<Plan>,
        guidance: GuidanceBundle,
        reference: &Reference,
    ) -> Result<TaskResult, WorkflowError> {
        let outcomes: Vec<Result<Candidate, MetricError>> = plans
            .into_par_iter()
            .map(|plan| {
                let outcome = match generate(&plan.request, self.generator.as_ref()) {
                    Ok(generation) => {
                        let score = self.score(&generation.document, reference)?;
                        let validity = check_svg(&serialize_svg(&generation.document));
                        CandidateOutcome::Valid {
                            document: generation.document,
                            score,
                            validity,
                            attempts: generation.attempts,
                        }
                    }
                    Err(e) => invalid(&e),
                };
                Ok(Candidate {
                    module: plan.module,
                    inputs: plan.inputs,
                    seed: plan.request.seed,
                    outcome,
                })
            })
            .collect();
        let candidates = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;

        let valid: Vec<(usize, Score)> = candidates
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.score().map(|s| (i, s.clone())))
            .collect();
        if valid.is_empty() {
            return Err(WorkflowError::AllCandidatesInvalid { candidates });
        }
        let scores: Vec<Score> = valid.iter().map(|(_, s)| s.clone()).collect();
        let chosen_index = valid[select_best(&scores)?].0;
        let output = candidates[chosen_index].document().expect("valid candidate").clone();
        Ok(TaskResult {
            query_id: query.id.clone(),
            task: query.task,
            candidates,
            chosen_index,
            guidance,
            output,
            selection_metric: query.task.selection_metric(),
            scoring_reference: query.task.scoring_reference(),
        })
    }
}

enum Reference<'a> {
    Text(&'a str),
    Image(&'a RasterImage),
}

fn invalid(e: &GeneratorError) -> CandidateOutcome {
    CandidateOutcome::Invalid {
        code: e.code().to_string(),
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::{parse_svg, ParseMode};

    fn partial() -> SvgDocument {
        parse_svg(
            r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="M 20 20 L 80 20 L 80 80 Z" fill="#264653"/></svg>"##,
            ParseMode::Strict,
        )
        .unwrap()
    }

    #[test]
    fn candidate_counts_and_metrics() {
        let p = Pipeline::mock();
        let img = render(&partial(), 224);
        let queries = [
            TaskQuery::text_to_svg("a", "a lighthouse", 1),
            TaskQuery::image_to_svg("b", img.clone(), 1),
            TaskQuery::partialsvg_to_svg("c", "a lighthouse", partial(), 1),
            TaskQuery::partialimage_to_svg("d", "a lighthouse", img, 1),
        ];
        for q in &queries {
            let r = p.run(q).unwrap();
            assert_eq!(r.candidates.len(), q.task.candidate_count());
            assert_eq!(r.selection_metric, q.task.selection_metric());
            for c in &r.candidates {
                assert_eq!(c.score().unwrap().metric, r.selection_metric);
            }
            assert!(!r.guidance.is_empty());
        }
    }

    #[test]
    fn missing_fields_rejected() {
        let q = TaskQuery {
            id: "x".into(),
            task: TaskKind::PartialSvgToSvg,
            text: Some("t".into()),
            image: None,
            partial_svg: None,
            seed: 0,
        };
        assert!(matches!(Pipeline::mock().run(&q), Err(WorkflowError::InvalidQuery(_))));
    }

    #[test]
    fn task_names_round_trip() {
        for k in TaskKind::ALL {
            assert_eq!(TaskKind::parse(k.name()), Some(k));
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
    }
}
