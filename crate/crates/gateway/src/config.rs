//! Endpoint configuration from a TOML file and environment variables.
//!
//! ```toml
//! [endpoint]
//! base_url = "http://localhost:8000/v1"
//! api_key = "secret"
//! model = "gpt-oss-120b"
//! temperature = 0.0
//! timeout_secs = 60
//! max_retries = 3
//! ```
//!
//! Environment overrides: `CHAINSCOPE_BASE_URL`, `CHAINSCOPE_API_KEY`,
//! `CHAINSCOPE_MODEL`, `CHAINSCOPE_TEMPERATURE`, `CHAINSCOPE_TIMEOUT_SECS`,
//! `CHAINSCOPE_MAX_RETRIES`.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::GatewayError;

#[derive(Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: String,
    pub model_name: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: String::new(),
            api_key: String::new(),
            model_name: String::new(),
            temperature: 0.0,
            timeout_secs: 60,
            max_retries: 3,
        }
    }
}

// The api key never appears in debug output or transcripts.
impl fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &"<redacted>")
            .field("model_name", &self.model_name)
            .field("temperature", &self.temperature)
            .field("timeout_secs", &self.timeout_secs)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

#[derive(Deserialize, Default)]
struct ConfigFile {
    endpoint: Option<EndpointTable>,
}

#[derive(Deserialize, Default)]
struct EndpointTable {
    base_url: Option<String>,
    api_key: Option<String>,
    model: Option<String>,
    temperature: Option<f64>,
    timeout_secs: Option<u64>,
    max_retries: Option<usize>,
}

impl EndpointConfig {
    /// Loads the optional config file, then applies environment overrides.
    /// Fails when no base URL or model name is configured anywhere.
    pub fn load(path: Option<&Path>) -> Result<Self, GatewayError> {
        let mut config = EndpointConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
            let file: ConfigFile = toml::from_str(&text)
                .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
            if let Some(table) = file.endpoint {
                if let Some(v) = table.base_url {
                    config.base_url = v;
                }
                if let Some(v) = table.api_key {
                    config.api_key = v;
                }
                if let Some(v) = table.model {
                    config.model_name = v;
                }
                if let Some(v) = table.temperature {
                    config.temperature = v;
                }
                if let Some(v) = table.timeout_secs {
                    config.timeout_secs = v;
                }
                if let Some(v) = table.max_retries {
                    config.max_retries = v;
                }
            }
        }
        config.apply_env();
        if config.base_url.is_empty() {
            return Err(GatewayError::Config(
                "no endpoint base URL configured (set CHAINSCOPE_BASE_URL or a config file)".into(),
            ));
        }
        if config.model_name.is_empty() {
            return Err(GatewayError::Config(
                "no model name configured (set CHAINSCOPE_MODEL or a config file)".into(),
            ));
        }
        Ok(config)
    }

    fn apply_env(&mut self) {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        if let Some(v) = var("CHAINSCOPE_BASE_URL") {
            self.base_url = v;
        }
        if let Some(v) = var("CHAINSCOPE_API_KEY") {
            self.api_key = v;
        }
        if let Some(v) = var("CHAINSCOPE_MODEL") {
            self.model_name = v;
        }
        if let Some(v) = var("CHAINSCOPE_TEMPERATURE").and_then(|v| v.parse().ok()) {
            self.temperature = v;
        }
        if let Some(v) = var("CHAINSCOPE_TIMEOUT_SECS").and_then(|v| v.parse().ok()) {
            self.timeout_secs = v;
        }
        if let Some(v) = var("CHAINSCOPE_MAX_RETRIES").and_then(|v| v.parse().ok()) {
            self.max_retries = v;
        }
    }
}
