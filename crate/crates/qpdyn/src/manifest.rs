//! Run manifests: a small JSON record written after a command's data
//! files land, so a directory of outputs is self-describing and stale
//! partial results are distinguishable from finished runs.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::csvio::atomic_write;
use crate::error::{QpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Subcommand that produced the outputs.
    pub command: String,
    /// SHA-256 of the effective configuration document.
    pub config_sha256: String,
    /// Wall-clock creation time, Unix seconds.
    pub created_unix_seconds: u64,
    /// Crate version that wrote the outputs.
    pub version: String,
    /// File names (relative to the manifest) written by the run.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_sha256: String, outputs: Vec<String>) -> Self {
        let created_unix_seconds = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.to_string(),
            config_sha256,
            created_unix_seconds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
        }
    }

    /// Writes `manifest.json` into `dir` atomically. Call after every
    /// data file has been renamed into place.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| QpError::Io(format!("manifest: {e}")))?;
        text.push('\n');
        atomic_write(&dir.join("manifest.json"), text.as_bytes())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QpError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| QpError::Malformed {
            line: Some(e.line()),
            reason: e.to_string(),
        })
    }
}
