mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use svgpipe_core::dataset::{
    curate_corpus, emit_training_records, load_corpus, split, write_jsonl, CaptionCache, CurateOptions,
    CurationRecord, DatasetError, TrainingFlavor, CLIP_THRESHOLD, DEFAULT_TEST_SIZE,
};
use svgpipe_core::metrics::{check_svg, clip_score, dino_similarity, mse, ssim, MetricError, Score};
use svgpipe_core::normalize::normalize_raw;
use svgpipe_core::raster::{path_to_trajectory, render, RasterImage};
use svgpipe_core::svg::{parse_svg, parse_svg_raw, path_data_string, serialize_svg, ParseMode, SvgDocument, SvgError};
use svgpipe_core::workflows::{load_queries, run_queries, TaskKind};

use config::Settings;

/// Failure classes, each with a fixed exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or input files.
    Usage(String),
    /// A remote backend failed.
    Provider(String),
    /// Unexpected failure, mostly I/O on outputs.
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Provider(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Provider(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Provider(_) => CliError::Provider(format!("{}: {e}", e.code())),
            other => CliError::Usage(format!("{}: {other}", other.code())),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Usage(format!("{}: {other}", other.code())),
        }
    }
}

fn internal(context: impl fmt::Display) -> impl FnOnce(io::Error) -> CliError {
    move |e| CliError::Internal(format!("{context}: {e}"))
}

const EXIT_GENERATION_FAILURES: u8 = 4;

#[derive(Parser)]
#[command(name = "svgpipe", version, about = "Parse, normalize, render, score and generate SVG icons")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, env = "SVGPIPE_CONFIG")]
    config: Option<PathBuf>,
    /// Use offline mock backends for every port.
    #[arg(long, global = true)]
    mock: bool,
    /// Worker threads for batch commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Render resolution in pixels.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    #[arg(long, global = true)]
    timeout_secs: Option<f64>,
    #[arg(long, global = true)]
    max_retries: Option<u32>,
    #[arg(long, global = true)]
    guidance_url: Option<String>,
    #[arg(long, global = true)]
    generator_url: Option<String>,
    #[arg(long, global = true)]
    embedder_url: Option<String>,
    /// Directory of `<request hash>.svg` replies for the mock generator.
    #[arg(long, global = true)]
    fixtures_dir: Option<String>,
}

impl Global {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("resolution", self.resolution.map(|v| v.to_string())),
            ("timeout_secs", self.timeout_secs.map(|v| v.to_string())),
            ("max_retries", self.max_retries.map(|v| v.to_string())),
            ("guidance_url", self.guidance_url.clone()),
            ("generator_url", self.generator_url.clone()),
            ("embedder_url", self.embedder_url.clone()),
            ("fixtures_dir", self.fixtures_dir.clone()),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse an SVG and print its structure as JSON.
    Parse {
        input: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Write the canonical form of an SVG (`-` for stdout).
    Normalize {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Rasterize an SVG to PNG, or PPM when the output ends in `.ppm`.
    Render { input: PathBuf, output: PathBuf },
    /// Compare two inputs. For `clip` the first input is the description text.
    Score {
        #[arg(long, value_enum)]
        metric: MetricArg,
        a: String,
        b: PathBuf,
    },
    /// Print the validity flag and diagnostics of an SVG file.
    Verify { input: PathBuf },
    /// Filter a corpus into curated records.
    Curate {
        /// Directory tree of SVG files.
        #[arg(long)]
        svg_dir: PathBuf,
        /// JSON object mapping file paths (relative to the tree) to descriptions.
        #[arg(long)]
        metadata: PathBuf,
        /// Output record JSONL.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        render_dir: Option<PathBuf>,
        #[arg(long, default_value_t = CLIP_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        require_partial: bool,
    },
    /// Split curated records into train and test ids.
    Split {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TEST_SIZE)]
        test_size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write training JSONL for one or all flavors.
    Emit {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = "all")]
        flavor: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Caption cache used by d_it2s (default: <out-dir>/captions.json).
        #[arg(long)]
        captions: Option<PathBuf>,
    },
    /// Run a query file through the generation workflows.
    RunTask {
        /// Task name, or `all` to run every query.
        task: String,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Skip per-query artifact directories.
        #[arg(long)]
        no_artifacts: bool,
    },
    /// Export a pen trajectory as `U x y` / `D x y` lines.
    Trajectory {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Ssim,
    Mse,
    Clip,
    Dino,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let settings = Settings::resolve(cli.global.config.as_deref(), |k| std::env::var(k).ok(), cli.global.flags(), cli.global.mock)?;
    if let Some(n) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Parse { input, strict } => cmd_parse(&mut out, &input, mode(strict)),
        Command::Normalize { input, output, strict } => cmd_normalize(&mut out, &input, &output, mode(strict)),
        Command::Render { input, output } => cmd_render(&settings, &input, &output),
        Command::Score { metric, a, b } => cmd_score(&mut out, &settings, metric, &a, &b),
        Command::Verify { input } => cmd_verify(&mut out, &input),
        Command::Curate { svg_dir, metadata, out: records, manifest, render_dir, threshold, require_partial } => {
            let opts = CurateOptions { threshold, resolution: settings.resolution()?, require_partial, render_dir };
            cmd_curate(&mut out, &settings, &svg_dir, &metadata, &records, manifest.as_deref(), &opts)
        }
        Command::Split { records, test_size, out: dest } => cmd_split(&mut out, &settings, &records, test_size, dest.as_deref()),
        Command::Emit { records, flavor, out_dir, captions } => cmd_emit(&mut out, &settings, &records, &flavor, &out_dir, captions),
        Command::RunTask { task, queries, out_dir, no_artifacts } => {
            cmd_run_task(&mut out, &settings, &task, &queries, &out_dir, !no_artifacts)
        }
        Command::Trajectory { input, output, spacing } => cmd_trajectory(&input, &output, spacing),
    }
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn emit_line(out: &mut impl Write, line: impl fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(internal("stdout"))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn svg_error(path: &Path, e: SvgError) -> CliError {
    CliError::Usage(format!("{}: {}: {e}", path.display(), e.code()))
}

fn load_svg(path: &Path, mode: ParseMode) -> Result<SvgDocument, CliError> {
    let text = read_text(path)?;
    let parsed = parse_svg_raw(&text, mode).map_err(|e| svg_error(path, e))?;
    normalize_raw(&parsed).map_err(|e| svg_error(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(internal(dir.display()))?;
    }
    fs::write(path, bytes).map_err(internal(path.display()))
}

fn cmd_parse(out: &mut impl Write, input: &Path, mode: ParseMode) -> Result<u8, CliError> {
    let doc = parse_svg(&read_text(input)?, mode).map_err(|e| svg_error(input, e))?;
    let vb = doc.view_box();
    let paths: Vec<Value> = doc
        .paths()
        .iter()
        .map(|p| {
            let s = p.style();
            json!({
                "d": path_data_string(p.commands()),
                "fill": s.fill.map(|c| c.hex()),
                "stroke": s.stroke.map(|c| c.hex()),
                "stroke_width": s.stroke_width,
                "fill_rule": format!("{:?}", s.fill_rule).to_lowercase(),
            })
        })
        .collect();
    emit_line(out, json!({ "view_box": [vb.min_x, vb.min_y, vb.width, vb.height], "paths": paths }))?;
    Ok(0)
}

fn cmd_normalize(out: &mut impl Write, input: &Path, output: &Path, mode: ParseMode) -> Result<u8, CliError> {
    let text = serialize_svg(&load_svg(input, mode)?);
    if output == Path::new("-") {
        out.write_all(text.as_bytes()).map_err(internal("stdout"))?;
    } else {
        write_file(output, text.as_bytes())?;
    }
    Ok(0)
}

fn cmd_render(settings: &Settings, input: &Path, output: &Path) -> Result<u8, CliError> {
    let image = render(&load_svg(input, ParseMode::Lenient)?, settings.resolution()?);
    let ppm = output.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    write_file(output, &if ppm { image.to_ppm() } else { image.to_png() })?;
    Ok(0)
}

fn is_svg(path: &Path, bytes: &[u8]) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"))
        || bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'<')
}

enum Input {
    Svg(SvgDocument),
    Image(RasterImage),
}

fn load_input(path: &Path) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if is_svg(path, &bytes) {
        load_svg(path, ParseMode::Lenient).map(Input::Svg)
    } else {
        RasterImage::decode(&bytes)
            .map(Input::Image)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// SVG inputs are rendered at the size of a square raster operand when there
/// is one, otherwise at the configured resolution.
fn rasterize(inputs: Vec<Input>, resolution: u32) -> Vec<RasterImage> {
    let side = inputs
        .iter()
        .find_map(|i| match i {
            Input::Image(img) if img.width() == img.height() => Some(img.width()),
            _ => None,
        })
        .unwrap_or(resolution);
    inputs
        .into_iter()
        .map(|i| match i {
            Input::Svg(doc) => render(&doc, side),
            Input::Image(img) => img,
        })
        .collect()
}

fn cmd_score(out: &mut impl Write, settings: &Settings, metric: MetricArg, a: &str, b: &Path) -> Result<u8, CliError> {
    let resolution = settings.resolution()?;
    let score: Score = match metric {
        MetricArg::Clip => {
            let embedder = settings.embedder()?;
            let image = rasterize(vec![load_input(b)?], resolution).remove(0);
            clip_score(a, &image, embedder.as_ref())?
        }
        _ => {
            let mut images = rasterize(vec![load_input(Path::new(a))?, load_input(b)?], resolution);
            let (y, x) = (images.pop().unwrap(), images.pop().unwrap());
            match metric {
                MetricArg::Ssim => ssim(&x, &y)?,
                MetricArg::Mse => mse(&x, &y)?,
                _ => dino_similarity(&x, &y, settings.embedder()?.as_ref())?,
            }
        }
    };
    if let Some(p) = &score.provider {
        eprintln!("provider: {p}");
    }
    emit_line(out, format!("{:.6}", score.value))?;
    Ok(0)
}

fn cmd_verify(out: &mut impl Write, input: &Path) -> Result<u8, CliError> {
    let report = check_svg(&read_text(input)?);
    emit_line(out, format!("valid={}", report.flag()))?;
    for d in &report.diagnostics {
        emit_line(out, format!("{}\t{}", d.code, d.message))?;
    }
    Ok(0)
}

fn cmd_curate(
    out: &mut impl Write,
    settings: &Settings,
    svg_dir: &Path,
    metadata: &Path,
    records_path: &Path,
    manifest_path: Option<&Path>,
    opts: &CurateOptions,
) -> Result<u8, CliError> {
    let embedder = settings.embedder()?;
    let (entries, unlabeled) = load_corpus(svg_dir, metadata)?;
    if let Some(dir) = &opts.render_dir {
        fs::create_dir_all(dir).map_err(internal(dir.display()))?;
    }
    let mut outcome = curate_corpus(&entries, embedder.as_ref(), settings.seed()?, opts);
    outcome.manifest.unlabeled = unlabeled.len();
    for (file, r) in &outcome.rejections {
        eprintln!("rejected {file}: {:?} {}", r.reason, r.detail);
    }
    if outcome.manifest.rejected.contains_key("ScoringFailed") && outcome.records.is_empty() {
        return Err(CliError::Provider("every record failed scoring; is the embedding backend reachable?".into()));
    }
    let lines: String = outcome.records.iter().map(|r| r.to_json().to_string() + "\n").collect();
    write_file(records_path, lines.as_bytes())?;
    let manifest = serde_json::to_string(&outcome.manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(p) = manifest_path {
        write_file(p, manifest.as_bytes())?;
    }
    emit_line(out, manifest)?;
    Ok(0)
}

fn cmd_split(out: &mut impl Write, settings: &Settings, records: &Path, test_size: usize, dest: Option<&Path>) -> Result<u8, CliError> {
    let ids: Vec<String> = CurationRecord::load_jsonl(records)?.into_iter().map(|r| r.id).collect();
    let seed = settings.seed()?;
    let s = split(&ids, test_size, seed)?;
    let manifest = json!({ "seed": seed, "test_size": test_size, "train": s.train, "test": s.test }).to_string();
    if let Some(p) = dest {
        write_file(p, manifest.as_bytes())?;
    }
    emit_line(out, manifest)?;
    Ok(0)
}

fn cmd_emit(
    out: &mut impl Write,
    settings: &Settings,
    records_path: &Path,
    flavor: &str,
    out_dir: &Path,
    captions: Option<PathBuf>,
) -> Result<u8, CliError> {
    let flavors: Vec<TrainingFlavor> = if flavor == "all" {
        TrainingFlavor::ALL.to_vec()
    } else {
        vec![TrainingFlavor::parse(flavor).ok_or_else(|| {
            let names: Vec<&str> = TrainingFlavor::ALL.iter().map(|f| f.name()).collect();
            CliError::Usage(format!("unknown flavor {flavor}; expected all or one of {}", names.join(", ")))
        })?]
    };
    let records = CurationRecord::load_jsonl(records_path)?;
    let mut cache = CaptionCache::new();
    if flavors.contains(&TrainingFlavor::DIt2s) {
        let cache_path = captions.unwrap_or_else(|| out_dir.join("captions.json"));
        cache = CaptionCache::load(&cache_path)?;
        let guidance = settings.guidance()?;
        let added = cache
            .fill(&records, guidance.as_ref(), settings.resolution()?, settings.seed()?)
            .map_err(|e| CliError::Provider(format!("{}: {e}", e.code())))?;
        eprintln!("captioned {added} new record(s)");
        if let Some(dir) = cache_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(internal(dir.display()))?;
        }
        cache.save(&cache_path).map_err(internal(cache_path.display()))?;
    }
    fs::create_dir_all(out_dir).map_err(internal(out_dir.display()))?;
    let mut counts = serde_json::Map::new();
    for f in flavors {
        let lines = emit_training_records(&records, f, &cache)?;
        write_jsonl(&out_dir.join(format!("{}.jsonl", f.name())), &lines).map_err(internal(f.name()))?;
        counts.insert(f.name().into(), lines.len().into());
    }
    emit_line(out, Value::Object(counts))?;
    Ok(0)
}

/// Per-task counts and mean selected score, read back from a results file.
#[derive(Default)]
struct TaskStats {
    ok: usize,
    failed: usize,
    score_sum: f64,
    metric: String,
}

fn cmd_run_task(
    out: &mut impl Write,
    settings: &Settings,
    task: &str,
    queries_path: &Path,
    out_dir: &Path,
    artifacts: bool,
) -> Result<u8, CliError> {
    let only = match task {
        "all" => None,
        name => Some(TaskKind::parse(name).ok_or_else(|| {
            let names: Vec<&str> = TaskKind::ALL.iter().map(|t| t.name()).collect();
            CliError::Usage(format!("unknown task {name}; expected all or one of {}", names.join(", ")))
        })?),
    };
    let pipeline = settings.pipeline()?;
    let mut queries = load_queries(queries_path, settings.seed()?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", queries_path.display())))?;
    if let Some(kind) = only {
        let before = queries.len();
        queries.retain(|q| q.as_ref().map_or(true, |q| q.task == kind));
        if queries.len() < before {
            eprintln!("skipped {} quer(ies) for other tasks", before - queries.len());
        }
    }
    fs::create_dir_all(out_dir).map_err(internal(out_dir.display()))?;
    let results_path = out_dir.join("results.jsonl");
    let artifact_dir = out_dir.join("artifacts");
    let summary = run_queries(&pipeline, &queries, &results_path, artifacts.then_some(artifact_dir.as_path()))
        .map_err(internal(results_path.display()))?;

    let mut stats: BTreeMap<String, TaskStats> = BTreeMap::new();
    let mut generation_failures = 0;
    let mut provider_failures = 0;
    for line in fs::read_to_string(&results_path).map_err(internal(results_path.display()))?.lines() {
        let v: Value = serde_json::from_str(line).map_err(|e| CliError::Internal(e.to_string()))?;
        let task = v["task"].as_str().unwrap_or("unknown").to_string();
        let entry = stats.entry(task).or_default();
        if v["status"] == "ok" {
            let chosen = &v["candidates"][v["chosen_index"].as_u64().unwrap_or(0) as usize];
            entry.ok += 1;
            entry.score_sum += chosen["score"]["value"].as_f64().unwrap_or(f64::NAN);
            entry.metric = v["selection_metric"].as_str().unwrap_or("").to_string();
        } else {
            entry.failed += 1;
            let code = v["error"]["code"].as_str().unwrap_or("");
            eprintln!("{}: {code}: {}", v["id"].as_str().unwrap_or("?"), v["error"]["message"].as_str().unwrap_or(""));
            if code == "AllCandidatesInvalid" {
                generation_failures += 1;
            } else if code.starts_with("Provider") {
                provider_failures += 1;
            }
        }
    }
    eprintln!("{:<22}{:>6}{:>8}  {:<12}{:>12}", "task", "ok", "failed", "metric", "mean");
    for (task, s) in &stats {
        let mean = if s.ok > 0 { format!("{:.4}", s.score_sum / s.ok as f64) } else { "-".into() };
        eprintln!("{task:<22}{:>6}{:>8}  {:<12}{mean:>12}", s.ok, s.failed, s.metric);
    }
    emit_line(out, json!({ "results": results_path, "summary": summary }))?;
    if generation_failures > 0 {
        return Ok(EXIT_GENERATION_FAILURES);
    }
    if provider_failures > 0 {
        return Err(CliError::Provider(format!("{provider_failures} quer(ies) failed on a backend")));
    }
    Ok(0)
}

fn cmd_trajectory(input: &Path, output: &Path, spacing: f64) -> Result<u8, CliError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(CliError::Usage("--spacing must be positive".into()));
    }
    let doc = load_svg(input, ParseMode::Lenient)?;
    write_file(output, path_to_trajectory(&doc, spacing).to_text().as_bytes())?;
    Ok(0)
}
