//! One manifest per command run, recording what went in and what came out.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable that overrides configured RNG seeds.
pub const SEED_ENV: &str = "PHANTOM_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub rng_seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            config_path: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            rng_seed: None,
            tool_version: TOOL_VERSION.into(),
            wall_time_s: 0.0,
        }
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.wall_time_s = elapsed.as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// The seed from `PHANTOM_SEED`, if set. An unparsable value is an error rather than silently
/// ignored.
pub fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{SEED_ENV}: {e}")),
    }
}
