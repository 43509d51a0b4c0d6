use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use svgpipe_core::generator::{GeneratorBackend, HttpGenerator, MockGenerator};
use svgpipe_core::guidance::{BackendConfig, Endpoint, GuidanceTools, HttpGuidance, MockGuidance};
use svgpipe_core::metrics::{EmbeddingPort, HistogramEmbedder, HttpEmbedder};
use svgpipe_core::provider::HttpClient;
use svgpipe_core::raster::DEFAULT_RESOLUTION;
use svgpipe_core::workflows::Pipeline;

use crate::CliError;

pub const KEYS: [&str; 9] = [
    "guidance_url",
    "generator_url",
    "embedder_url",
    "api_key",
    "timeout_secs",
    "max_retries",
    "resolution",
    "seed",
    "fixtures_dir",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Port {
    Guidance,
    Generator,
    Embedder,
}

impl Port {
    fn key(self) -> &'static str {
        match self {
            Port::Guidance => "guidance_url",
            Port::Generator => "generator_url",
            Port::Embedder => "embedder_url",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Port::Guidance => "guidance",
            Port::Generator => "generator",
            Port::Embedder => "embedding",
        }
    }
}

pub fn env_name(key: &str) -> String {
    format!("SVGPIPE_{}", key.to_ascii_uppercase())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(format!("line {}: unknown key {k}", n + 1));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Resolved settings. Precedence: flags, then `SVGPIPE_*` variables, then the file.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    pub mock: bool,
}

impl Settings {
    pub fn resolve(
        file: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
        flags: BTreeMap<String, String>,
        mock_flag: bool,
    ) -> Result<Self, CliError> {
        let mut values = match file {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?;
                parse_kv(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        for key in KEYS {
            if let Some(v) = env(&env_name(key)).filter(|v| !v.is_empty()) {
                values.insert(key.to_string(), v);
            }
        }
        values.extend(flags);
        let no_network = env("NO_NETWORK").is_some_and(|v| v == "1");
        Ok(Settings { values, mock: mock_flag || no_network })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("{key}: \"{v}\" is not a valid number"))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.number("seed", 0)
    }

    pub fn resolution(&self) -> Result<u32, CliError> {
        self.number("resolution", DEFAULT_RESOLUTION)
    }

    pub fn backend(&self) -> Result<BackendConfig, CliError> {
        let secs: f64 = self.number("timeout_secs", 60.0)?;
        if !(secs > 0.0 && secs.is_finite()) {
            return Err(CliError::Usage("timeout_secs must be positive".into()));
        }
        let cfg = BackendConfig {
            endpoint: Endpoint::Mock,
            timeout: Duration::from_secs_f64(secs),
            max_retries: self.number("max_retries", 2)?,
            seed: self.seed()?,
            resolution: self.resolution()?,
            api_key: self.get("api_key").map(str::to_string),
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Endpoint for a port; a missing URL is an error unless running mocked.
    pub fn endpoint(&self, port: Port) -> Result<Endpoint, CliError> {
        if self.mock {
            return Ok(Endpoint::Mock);
        }
        match self.get(port.key()) {
            Some(url) => Ok(Endpoint::parse(url)),
            None => Err(CliError::Usage(format!(
                "no endpoint configured for the {} port: pass --{} or set {} (or use --mock)",
                port.name(),
                port.key().replace('_', "-"),
                env_name(port.key())
            ))),
        }
    }

    fn client(&self, url: String) -> Result<HttpClient, CliError> {
        let cfg = self.backend()?;
        let mut client = HttpClient::new(url, cfg.timeout, cfg.max_retries);
        client.api_key = cfg.api_key;
        Ok(client)
    }

    pub fn guidance(&self) -> Result<Arc<dyn GuidanceTools>, CliError> {
        let cfg = self.backend()?;
        Ok(match self.endpoint(Port::Guidance)? {
            Endpoint::Mock => Arc::new(MockGuidance::new(cfg.resolution)),
            Endpoint::Url(url) => Arc::new(HttpGuidance::new(url, &cfg)),
        })
    }

    pub fn generator(&self) -> Result<Arc<dyn GeneratorBackend>, CliError> {
        Ok(match self.endpoint(Port::Generator)? {
            Endpoint::Mock => match self.get("fixtures_dir") {
                Some(dir) => Arc::new(
                    MockGenerator::load_fixtures(&PathBuf::from(dir))
                        .map_err(|e| CliError::Usage(format!("fixtures_dir {dir}: {e}")))?,
                ),
                None => Arc::new(MockGenerator::new()),
            },
            Endpoint::Url(url) => Arc::new(HttpGenerator::new(self.client(url)?)),
        })
    }

    pub fn embedder(&self) -> Result<Arc<dyn EmbeddingPort>, CliError> {
        Ok(match self.endpoint(Port::Embedder)? {
            Endpoint::Mock => Arc::new(HistogramEmbedder),
            Endpoint::Url(url) => Arc::new(HttpEmbedder::new(self.client(url)?)),
        })
    }

    /// Ports are checked generator, guidance, embedder so the first missing one is reported.
    pub fn pipeline(&self) -> Result<Pipeline, CliError> {
        let generator = self.generator()?;
        let guidance = self.guidance()?;
        let embedder = self.embedder()?;
        let mut p = Pipeline::new(guidance, generator, embedder);
        p.resolution = self.resolution()?;
        Ok(p)
    }
}
