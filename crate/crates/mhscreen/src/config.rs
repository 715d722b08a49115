//! Service configuration file (TOML).

use std::path::{Path, PathBuf};

use mhscreen_core::review::Thresholds;
use serde::{Deserialize, Serialize};

use crate::store::DEFAULT_SNAPSHOT_EVERY;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Built dashboard assets, served at `/` when set.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreConfig {
    pub log_path: PathBuf,
    pub snapshot_every: u64,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            log_path: PathBuf::from("events.jsonl"),
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub classifier_path: Option<PathBuf>,
    pub vectorizer_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub enabled: bool,
    pub endpoint: String,
    pub model: String,
    pub timeout_ms: u64,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub max_in_flight: usize,
    /// Dotted path to the reply text in the response body.
    pub reply_path: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            enabled: false,
            endpoint: "http://127.0.0.1:11434/v1/chat/completions".into(),
            model: "gpt-oss-20b".into(),
            timeout_ms: 10_000,
            api_key_env: None,
            max_in_flight: 4,
            reply_path: "choices.0.message.content".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub server: ServerConfig,
    pub store: StoreConfig,
    pub model: ModelConfig,
    pub thresholds: Thresholds,
    pub llm: LlmConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut c: Config = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        c.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        c.validate()?;
        Ok(c)
    }

    /// Relative paths in a config file are relative to that file.
    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.store.log_path);
        for p in [
            &mut self.server.static_dir,
            &mut self.model.classifier_path,
            &mut self.model.vectorizer_path,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.flag", t.flag),
            ("thresholds.urgent_suicide", t.urgent_suicide),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if self.llm.max_in_flight == 0 {
            return Err(ConfigError::Invalid("llm.max_in_flight must be at least 1".into()));
        }
        if self.llm.timeout_ms == 0 {
            return Err(ConfigError::Invalid("llm.timeout_ms must be positive".into()));
        }
        Ok(())
    }
}
