//! Run manifests: every subcommand records its resolved parameters and
//! seeds next to its primary output, so a run can be re-invoked identically
//! from the manifest alone.

use std::path::{Path, PathBuf};

use serde::Serialize;

use fuzzcamp::FORMAT_VERSION;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub format_version: u32,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value, started_at_ms: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            format_version: FORMAT_VERSION,
            started_at_ms,
            finished_at_ms: now_ms(),
        }
    }

    pub fn write_next_to(&self, primary_output: &Path) -> std::io::Result<PathBuf> {
        let mut name = primary_output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".to_string());
        name.push_str(".manifest.json");
        let path = primary_output.with_file_name(name);
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest"))
    }
}

pub fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
