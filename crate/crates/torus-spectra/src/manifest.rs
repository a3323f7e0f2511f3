//! Machine-readable record of one CLI run.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// Arguments as typed, without the program name.
    pub argv: Vec<String>,
    /// Every flag after defaults were applied.
    pub flags: serde_json::Value,
    pub rng_seed: Option<u64>,
    pub threads: usize,
    pub duration_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: Vec<String>, flags: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            argv,
            flags,
            rng_seed: None,
            threads: rayon::current_num_threads(),
            duration_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.duration_seconds = elapsed.as_secs_f64();
    }

    /// `<output>.manifest.json` next to a data file.
    pub fn sibling_path(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_beside(&self, output: &Path) -> std::io::Result<PathBuf> {
        let path = Self::sibling_path(output);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}
