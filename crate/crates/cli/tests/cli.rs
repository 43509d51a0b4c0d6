use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use serde_json::Value;

const SQUARE: &str = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100"><rect x="10" y="10" width="40" height="40" fill="#336699"/><path d="M60 60 h30 v30 h-30 z" fill="red"/></svg>"##;
const GRADIENT: &str = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><defs><linearGradient id="g"/></defs><path d="M 0 0 L 10 0 L 10 10 Z" fill="url(#g)"/></svg>"##;

fn svgpipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svgpipe"))
        .args(args)
        .env_remove("NO_NETWORK")
        .env_remove("SVGPIPE_CONFIG")
        .env_remove("SVGPIPE_GENERATOR_URL")
        .env_remove("SVGPIPE_GUIDANCE_URL")
        .env_remove("SVGPIPE_EMBEDDER_URL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn normalize_writes_canonical_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.svg", SQUARE);
    let output = dir.path().join("out.svg");
    let o = svgpipe(&["normalize", p(&input), p(&output)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&output).unwrap();
    assert!(text.contains(r#"viewBox="0 0 200 200""#));
    assert!(text.contains(r#"d="M 20 20 L 100 20 L 100 100 L 20 100 Z""#), "{text}");

    // canonical output is a fixed point
    let again = dir.path().join("again.svg");
    assert_eq!(svgpipe(&["normalize", p(&output), p(&again), "--strict"]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), text);

    let o = svgpipe(&["normalize", p(&input), "-"]);
    assert_eq!(stdout(&o), text);
}

#[test]
fn malformed_and_unsupported_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.svg", "<svg viewBox='0 0 10 10'><path d='M 0 0 L 5 5 Z'></svg>");
    let o = svgpipe(&["normalize", p(&bad), p(&dir.path().join("x.svg"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let grad = write(dir.path(), "grad.svg", GRADIENT);
    let o = svgpipe(&["normalize", "--strict", p(&grad), p(&dir.path().join("y.svg"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("GradientUnsupported"), "{}", stderr(&o));
}

#[test]
fn parse_prints_structure() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.svg", SQUARE);
    let o = svgpipe(&["parse", p(&input)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["view_box"], serde_json::json!([0.0, 0.0, 100.0, 100.0]));
    assert_eq!(v["paths"].as_array().unwrap().len(), 2);
    assert_eq!(v["paths"][1]["fill"], "#ff0000");
}

#[test]
fn score_identity_and_mixed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.svg", SQUARE);
    let o = svgpipe(&["score", "--metric", "ssim", p(&a), p(&a)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1.000000\n");

    let png = dir.path().join("a.png");
    assert_eq!(svgpipe(&["render", p(&a), p(&png), "--resolution", "64"]).status.code(), Some(0));
    let o = svgpipe(&["score", "--metric", "mse", p(&a), p(&png)]);
    assert_eq!(stdout(&o), "0.000000\n", "{}", stderr(&o));

    let o = svgpipe(&["score", "--metric", "clip", "a blue square", p(&png), "--mock"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((0.0..=100.0).contains(&v));
}

#[test]
fn model_metrics_need_an_embedder() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.svg", SQUARE);
    let o = svgpipe(&["score", "--metric", "dino", p(&a), p(&a)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("embedding port"), "{}", stderr(&o));
}

#[test]
fn verify_reports_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.svg", "<svg xmlns='http://www.w3.org/2000/svg'><path d='M 0 0 S 1 1'/></svg>");
    let o = svgpipe(&["verify", p(&bad)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("valid=0"));
    assert!(lines.next().is_some(), "diagnostics expected");

    let good = dir.path().join("good.svg");
    svgpipe(&["normalize", p(&write(dir.path(), "in.svg", SQUARE)), p(&good)]);
    assert_eq!(stdout(&svgpipe(&["verify", p(&good)])), "valid=1\n");
}

#[test]
fn render_and_trajectory_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.svg", SQUARE);
    let ppm = dir.path().join("a.ppm");
    assert_eq!(svgpipe(&["render", p(&a), p(&ppm)]).status.code(), Some(0));
    assert!(fs::read(&ppm).unwrap().starts_with(b"P6\n224 224\n255\n"));

    let traj = dir.path().join("a.txt");
    assert_eq!(svgpipe(&["trajectory", p(&a), p(&traj), "--spacing", "5"]).status.code(), Some(0));
    let text = fs::read_to_string(&traj).unwrap();
    assert!(text.lines().all(|l| l.starts_with("U ") || l.starts_with("D ")));
    assert!(text.lines().any(|l| l.starts_with("D ")));
}

/// Writes `n` labelled icons and returns (svg dir, metadata file).
fn corpus(dir: &Path, n: usize) -> (PathBuf, PathBuf) {
    let root = dir.join("svgs");
    let mut meta = serde_json::Map::new();
    for i in 0..n {
        let x = 10 + (i * 7) % 120;
        let svg = format!(
            r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200"><path d="M {x} 20 L 190 20 L 190 {y} Z" fill="#{c:02x}3050"/><circle cx="60" cy="140" r="{r}" fill="#e0a020"/><path d="M 10 190 L 50 150 L 90 190 Z" fill="#101010"/></svg>"##,
            y = 40 + i * 3,
            c = (i * 37) % 256,
            r = 10 + i % 30
        );
        write(&root, &format!("icon{i:02}.svg"), &svg);
        meta.insert(format!("icon{i:02}.svg"), format!("icon {i}").into());
    }
    write(&root, "unlabelled.svg", SQUARE);
    let meta_path = write(dir, "meta.json", &Value::Object(meta).to_string());
    (root, meta_path)
}

#[test]
fn curate_split_emit_chain() {
    let dir = tempfile::tempdir().unwrap();
    let (root, meta) = corpus(dir.path(), 12);
    let records = dir.path().join("records.jsonl");
    let renders = dir.path().join("renders");
    let o = svgpipe(&[
        "curate", "--mock", "--svg-dir", p(&root), "--metadata", p(&meta), "--out", p(&records),
        "--render-dir", p(&renders), "--threshold", "0", "--seed", "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(manifest["inputs"], 12);
    assert_eq!(manifest["unlabeled"], 1);
    let retained = manifest["retained"].as_u64().unwrap();
    assert_eq!(fs::read_to_string(&records).unwrap().lines().count() as u64, retained);
    assert!(retained >= 10);
    assert_eq!(fs::read_dir(&renders).unwrap().count() as u64, 2 * retained);

    let split = |seed: &str| stdout(&svgpipe(&["split", "--records", p(&records), "--test-size", "3", "--seed", seed]));
    let first = split("1");
    assert_eq!(first, split("1"));
    assert_ne!(first, split("2"));
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["test"].as_array().unwrap().len(), 3);

    let o = svgpipe(&["split", "--records", p(&records), "--test-size", "500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotEnoughRecords"));

    let out_dir = dir.path().join("train");
    let o = svgpipe(&["emit", "--mock", "--records", p(&records), "--out-dir", p(&out_dir)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let counts: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for flavor in ["d_i2s", "d_t2s", "d_it2s", "dp_t2s", "dp_it2s"] {
        let text = fs::read_to_string(out_dir.join(format!("{flavor}.jsonl"))).unwrap();
        assert_eq!(text.lines().count() as u64, counts[flavor].as_u64().unwrap());
        assert_eq!(counts[flavor].as_u64().unwrap(), retained);
    }
    assert!(out_dir.join("captions.json").exists());

    let o = svgpipe(&["emit", "--records", p(&records), "--out-dir", p(&out_dir), "--flavor", "d_x"]);
    assert_eq!(o.status.code(), Some(1));
}

fn queries(dir: &Path, n: usize) -> PathBuf {
    let image = dir.join("img.png");
    let svg = write(dir, "src.svg", SQUARE);
    assert_eq!(svgpipe(&["render", p(&svg), p(&image)]).status.code(), Some(0));
    let partial = r##"<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 200 200'><path d='M 10 10 L 90 10 L 90 90 Z' fill='#204060'/></svg>"##;
    let lines: Vec<String> = (0..n)
        .map(|i| {
            let q = match i % 4 {
                0 => serde_json::json!({ "id": format!("q{i}"), "task": "text_to_svg", "text": "a tree", "seed": i }),
                1 => serde_json::json!({ "id": format!("q{i}"), "task": "image_to_svg", "image": "img.png", "seed": i }),
                2 => serde_json::json!({ "id": format!("q{i}"), "task": "partialsvg_to_svg", "text": "a boat", "partial_svg": partial, "seed": i }),
                _ => serde_json::json!({ "id": format!("q{i}"), "task": "partialimage_to_svg", "text": "a boat", "image": "img.png", "seed": i }),
            };
            q.to_string()
        })
        .collect();
    write(dir, "queries.jsonl", &(lines.join("\n") + "\n"))
}

#[test]
fn run_task_mock_batch_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let q = queries(dir.path(), 10);
    let run = |out: &str, jobs: &str| {
        let out_dir = dir.path().join(out);
        let o = svgpipe(&["run-task", "all", "--mock", "--queries", p(&q), "--out-dir", p(&out_dir), "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains("mean"));
        (fs::read(out_dir.join("results.jsonl")).unwrap(), out_dir)
    };
    let (a, out_dir) = run("r1", "1");
    let (b, _) = run("r2", "4");
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
    assert!(out_dir.join("artifacts/q0/scores.tsv").exists());

    let out_dir = dir.path().join("only_t1");
    let o = svgpipe(&["run-task", "text_to_svg", "--mock", "--queries", p(&q), "--out-dir", p(&out_dir), "--no-artifacts"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(out_dir.join("results.jsonl")).unwrap().lines().count(), 3);
    assert!(!out_dir.join("artifacts").exists());
}

#[test]
fn no_network_env_forces_mock() {
    let dir = tempfile::tempdir().unwrap();
    let q = queries(dir.path(), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_svgpipe"))
        .args(["run-task", "all", "--queries", p(&q), "--out-dir", p(&dir.path().join("o"))])
        .env("NO_NETWORK", "1")
        .env("SVGPIPE_GENERATOR_URL", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_backend_without_mock_names_the_port() {
    let dir = tempfile::tempdir().unwrap();
    let q = queries(dir.path(), 2);
    let o = svgpipe(&["run-task", "all", "--queries", p(&q), "--out-dir", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("generator port"), "{}", stderr(&o));

    let conf = write(dir.path(), "svgpipe.conf", "generator_url = mock\nguidance_url = mock\n");
    let o = svgpipe(&["run-task", "all", "--config", p(&conf), "--queries", p(&q), "--out-dir", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("embedding port"), "{}", stderr(&o));
}

/// Generator backend that answers every request with prose.
fn refusing_generator() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            length = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let reply = r#"{"text":"I cannot draw that."}"#;
                let _ = write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
            });
        }
    });
    base
}

#[test]
fn all_invalid_candidates_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let q = queries(dir.path(), 1);
    let url = refusing_generator();
    let o = svgpipe(&[
        "run-task", "all", "--queries", p(&q), "--out-dir", p(&dir.path().join("o")),
        "--generator-url", &url, "--guidance-url", "mock", "--embedder-url", "mock",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let line = fs::read_to_string(dir.path().join("o/results.jsonl")).unwrap();
    let v: Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["error"]["code"], "AllCandidatesInvalid");
}

#[test]
fn unreachable_backend_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let q = queries(dir.path(), 1);
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let o = svgpipe(&[
        "run-task", "all", "--queries", p(&q), "--out-dir", p(&dir.path().join("o")), "--max-retries", "0",
        "--timeout-secs", "2", "--generator-url", "mock", "--embedder-url", "mock",
        "--guidance-url", &format!("http://127.0.0.1:{port}"),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("ProviderUnavailable"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(svgpipe(&["score", "--metric", "psnr", "a", "b"]).status.code(), Some(1));
    assert_eq!(svgpipe(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(svgpipe(&["--help"]).status.code(), Some(0));
}
