use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: String,
    /// Full command line; re-running it reproduces the outputs.
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: u64,
    pub jobs: usize,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(subcommand: &str, flags: impl Serialize, seed: u64, jobs: usize) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            argv: std::env::args().collect(),
            flags: serde_json::to_value(flags).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            jobs,
            timings: BTreeMap::new(),
        }
    }

    pub fn time(&mut self, phase: &str, d: Duration) {
        *self.timings.entry(phase.to_string()).or_insert(0.0) += d.as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}
