use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ShellError;

/// Environment variable overriding the bind address.
pub const BIND_ENV: &str = "GSIGN_BIND";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Tiles kept in the LRU cache.
    pub tile_cache_entries: usize,
    /// Largest `n` accepted by `/api/orbit`.
    pub max_horizon: usize,
    /// Largest `width * height` accepted by `/api/tile`.
    pub max_tile_pixels: usize,
    /// Largest `steps` accepted by `/api/tile`.
    pub max_tile_steps: usize,
    /// Directory served at `/` when present.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
            tile_cache_entries: 64,
            max_horizon: 1_000_000,
            max_tile_pixels: 1024 * 1024,
            max_tile_steps: 100_000,
            static_dir: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ShellError> {
        toml::from_str(text).map_err(|e| ShellError::Usage(format!("bad config: {e}")))
    }

    /// Defaults, then the optional TOML file, then `GSIGN_BIND`.
    pub fn load(path: Option<&Path>) -> Result<Self, ShellError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ShellError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                ServiceConfig::from_toml(&text)?
            }
            None => ServiceConfig::default(),
        };
        if let Ok(bind) = std::env::var(BIND_ENV) {
            if !bind.is_empty() {
                config.bind = bind;
            }
        }
        if config.tile_cache_entries == 0 {
            return Err(ShellError::Usage(
                "tile_cache_entries must be at least 1".into(),
            ));
        }
        Ok(config)
    }
}
