//! JSON run manifest written next to every CSV result.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub git_describe: &'static str,
    pub command: Vec<String>,
    pub unix_time: u64,
    pub config: Value,
    pub seeds: Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(config: Value, seeds: Value, outputs: &[&Path]) -> Self {
        Self {
            tool: "nbcm",
            version: env!("CARGO_PKG_VERSION"),
            git_describe: env!("NBCM_GIT_DESCRIBE"),
            command: std::env::args().collect(),
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            config,
            seeds,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// `results.csv` -> `results.manifest.json`.
pub fn path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
