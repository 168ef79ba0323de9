//! LLM clients. The replay client serves recorded completions keyed by the
//! SHA-256 of the prompt bytes; the remote client posts to an HTTP endpoint.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::dataset::parse_jsonl;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("no recorded completions for prompt {digest}")]
    ReplayMiss { digest: String },
    #[error("prompt {digest} has {available} recorded completions, {requested} requested")]
    ReplayShort { digest: String, available: usize, requested: usize },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// Source of completions. Implementations are shared across pipeline workers.
pub trait LlmClient: Send + Sync {
    fn generate(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<String>, ClientError>;

    /// Short description recorded in reports.
    fn describe(&self) -> String;
}

/// Lowercase hex SHA-256 of the prompt's UTF-8 bytes.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// One line of a replay store. `digest` may be omitted when `prompt` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub completions: Vec<String>,
}

/// In-memory replay store. Records for the same digest accumulate in file
/// order.
#[derive(Debug, Clone, Default)]
pub struct ReplayClient {
    entries: HashMap<String, Vec<String>>,
    source: Option<PathBuf>,
}

impl ReplayClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
        let mut client = Self::parse(&text)?;
        client.source = Some(path.to_owned());
        Ok(client)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut client = Self::default();
        for (line, record) in parse_jsonl::<ReplayRecord>(text)? {
            let digest = match (record.digest, record.prompt) {
                (Some(d), Some(p)) if d != prompt_digest(&p) => {
                    return Err(HarnessError::Schema { line, message: "digest does not match prompt".into() });
                }
                (Some(d), _) => d.to_ascii_lowercase(),
                (None, Some(p)) => prompt_digest(&p),
                (None, None) => {
                    return Err(HarnessError::Schema { line, message: "record needs `digest` or `prompt`".into() });
                }
            };
            client.entries.entry(digest).or_default().extend(record.completions);
        }
        Ok(client)
    }

    pub fn insert(&mut self, prompt: &str, completions: impl IntoIterator<Item = impl Into<String>>) {
        self.entries
            .entry(prompt_digest(prompt))
            .or_default()
            .extend(completions.into_iter().map(Into::into));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes one record per digest, sorted by digest.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        let mut digests: Vec<&String> = self.entries.keys().collect();
        digests.sort();
        for d in digests {
            let record = ReplayRecord { digest: Some(d.clone()), prompt: None, completions: self.entries[d].clone() };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl LlmClient for ReplayClient {
    fn generate(&self, prompt: &str, n: usize, _temperature: f64) -> Result<Vec<String>, ClientError> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let digest = prompt_digest(prompt);
        let stored = self.entries.get(&digest).ok_or_else(|| ClientError::ReplayMiss { digest: digest.clone() })?;
        if stored.len() < n {
            return Err(ClientError::ReplayShort { digest, available: stored.len(), requested: n });
        }
        Ok(stored[..n].to_vec())
    }

    fn describe(&self) -> String {
        match &self.source {
            Some(p) => format!("replay:{}", p.display()),
            None => "replay".to_owned(),
        }
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    n: usize,
    temperature: f64,
}

#[derive(Deserialize)]
struct GenerateResponse {
    completions: Vec<String>,
}

/// Posts `{prompt, n, temperature}` as JSON and expects `{completions: [...]}`
/// back with exactly `n` strings.
#[derive(Debug, Clone)]
pub struct RemoteClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(600)))
            .build()
            .new_agent();
        RemoteClient { endpoint: endpoint.into(), agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl LlmClient for RemoteClient {
    fn generate(&self, prompt: &str, n: usize, temperature: f64) -> Result<Vec<String>, ClientError> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let body = serde_json::to_string(&GenerateRequest { prompt, n, temperature })
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let parsed: GenerateResponse =
            serde_json::from_str(&text).map_err(|e| ClientError::MalformedResponse(e.to_string()))?;
        if parsed.completions.len() != n {
            return Err(ClientError::MalformedResponse(format!(
                "expected {n} completions, got {}",
                parsed.completions.len()
            )));
        }
        Ok(parsed.completions)
    }

    fn describe(&self) -> String {
        format!("remote:{}", self.endpoint)
    }
}

/// Where completions come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientKind {
    Replay(PathBuf),
    Remote(String),
}

impl ClientKind {
    /// Parses `replay:PATH`, `remote:URL` or bare `remote`, which takes the
    /// endpoint from `fallback_endpoint`.
    pub fn parse(spec: &str, fallback_endpoint: Option<&str>) -> Result<Self, HarnessError> {
        let config = |m: String| HarnessError::Config(m);
        if let Some(path) = spec.strip_prefix("replay:") {
            if path.is_empty() {
                return Err(config("replay client needs a path".into()));
            }
            return Ok(ClientKind::Replay(PathBuf::from(path)));
        }
        let endpoint = match spec.strip_prefix("remote") {
            Some("") | Some(":") => fallback_endpoint,
            Some(rest) if rest.starts_with(':') => Some(&rest[1..]),
            _ => return Err(config(format!("unknown client `{spec}` (expected replay:PATH or remote:URL)"))),
        };
        endpoint
            .map(|e| ClientKind::Remote(e.to_owned()))
            .ok_or_else(|| config("remote client needs an endpoint".into()))
    }

    pub fn build(&self) -> Result<Box<dyn LlmClient>, HarnessError> {
        Ok(match self {
            ClientKind::Replay(path) => Box::new(ReplayClient::load(path)?),
            ClientKind::Remote(url) => Box::new(RemoteClient::new(url.clone())),
        })
    }
}

/// Sampling configuration shared by every request of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub kind: ClientKind,
    pub temperature: f64,
    pub samples_per_mode: usize,
    pub parallelism: usize,
}

impl ClientConfig {
    pub const DEFAULT_TEMPERATURE: f64 = 0.4;
    pub const DEFAULT_SAMPLES: usize = 10;

    pub fn new(kind: ClientKind) -> Self {
        ClientConfig {
            kind,
            temperature: Self::DEFAULT_TEMPERATURE,
            samples_per_mode: Self::DEFAULT_SAMPLES,
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(HarnessError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.samples_per_mode == 0 {
            return Err(HarnessError::Config("samples per mode must be >= 1".into()));
        }
        if self.parallelism == 0 {
            return Err(HarnessError::Config("parallelism must be >= 1".into()));
        }
        Ok(())
    }
}
