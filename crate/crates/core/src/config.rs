//! Workspace configuration file (`megal.config.json`).
//!
//! ```json
//! {
//!   "aliases":      { "eclipse": "eclipse" },
//!   "modulePaths":  ["models"],
//!   "searchPaths":  ["lib"],
//!   "transients":   { "copyXml": { "cmd": ["cat", "company.xml"], "capture": "stdout", "timeoutSec": 10 } },
//!   "plugins":      { "veto": { "cmd": ["sh", "plugins/veto.sh"], "timeoutSec": 10 } },
//!   "knowledgeMap": "knowledge.json",
//!   "inferrers":    ["subsetTransitivity", "elementOfLifting", "parts", "annotationScheme"],
//!   "maxRounds":    100,
//!   "partDepth":    3
//! }
//! ```
//!
//! Every key is optional. Relative paths are taken relative to the directory
//! holding the config file, which is also the workspace root.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

pub const CONFIG_FILE_NAME: &str = "megal.config.json";
pub const DEFAULT_TIMEOUT_SEC: f64 = 10.0;
pub const DEFAULT_MAX_ROUNDS: usize = 100;
pub const DEFAULT_PART_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capture {
    Stdout,
    File(String),
}

impl<'de> Deserialize<'de> for Capture {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Keyword(String),
            File { file: String },
        }
        match Repr::deserialize(deserializer)? {
            Repr::Keyword(k) if k == "stdout" => Ok(Capture::Stdout),
            Repr::Keyword(k) => Err(serde::de::Error::custom(format!("unknown capture mode `{k}`"))),
            Repr::File { file } => Ok(Capture::File(file)),
        }
    }
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SEC
}

fn default_capture() -> Capture {
    Capture::Stdout
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TransientSpec {
    pub cmd: Vec<String>,
    #[serde(default = "default_capture")]
    pub capture: Capture,
    #[serde(default = "default_timeout")]
    pub timeout_sec: f64,
}

impl TransientSpec {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_sec.max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PluginSpec {
    pub cmd: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_sec: f64,
}

impl PluginSpec {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_sec.max(0.0))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
    #[serde(default)]
    pub module_paths: Vec<String>,
    #[serde(default)]
    pub search_paths: Vec<String>,
    #[serde(default)]
    pub transients: BTreeMap<String, TransientSpec>,
    #[serde(default)]
    pub plugins: BTreeMap<String, PluginSpec>,
    #[serde(default)]
    pub knowledge_map: Option<String>,
    /// Inferrer names to run, in order. Defaults to every built-in.
    #[serde(default)]
    pub inferrers: Option<Vec<String>>,
    #[serde(default)]
    pub max_rounds: Option<usize>,
    #[serde(default)]
    pub part_depth: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid knowledge map {path}: {message}")]
    KnowledgeMap { path: PathBuf, message: String },
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Config::from_json(&text).map_err(|source| ConfigError::Json { path: path.to_path_buf(), source })
    }

    /// Load the knowledge map named by `knowledgeMap`, if any.
    pub fn load_knowledge_map(&self, root: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
        let Some(rel) = &self.knowledge_map else {
            return Ok(BTreeMap::new());
        };
        let path = root.join(rel);
        let text = fs::read_to_string(&path)
            .map_err(|e| ConfigError::KnowledgeMap { path: path.clone(), message: e.to_string() })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::KnowledgeMap { path, message: e.to_string() })
    }

    pub fn max_rounds(&self) -> usize {
        self.max_rounds.unwrap_or(DEFAULT_MAX_ROUNDS).max(1)
    }

    pub fn part_depth(&self) -> usize {
        self.part_depth.unwrap_or(DEFAULT_PART_DEPTH)
    }
}
