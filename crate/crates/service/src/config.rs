use std::path::{Path, PathBuf};

use loe_core::index::FilterBand;
use serde::Deserialize;

use crate::{require_file, ServiceError};

/// Service settings, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub index: PathBuf,
    pub model: PathBuf,
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default)]
    pub default_band: FilterBand,
    #[serde(default = "default_max_k")]
    pub max_k: usize,
    #[serde(default)]
    pub cors_origins: Vec<String>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_max_k() -> usize {
    100
}

impl ServiceConfig {
    pub fn new(index: impl Into<PathBuf>, model: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            index: index.into(),
            model: model.into(),
            listen: default_listen(),
            default_band: FilterBand::All,
            max_k: default_max_k(),
            cors_origins: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    /// Reads a TOML file; relative artifact paths resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(dir) = path.parent() {
            config.index = dir.join(&config.index);
            config.model = dir.join(&config.model);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.max_k == 0 {
            return Err(ServiceError::Config("max_k must be at least 1".into()));
        }
        require_file("index", &self.index)?;
        require_file("model", &self.model)?;
        Ok(())
    }
}
