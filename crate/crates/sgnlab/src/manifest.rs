//! Run manifests: a small JSON record of what a command produced.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 over the canonical sorted `section.key = value` pairs, so
    /// reordering keys in the file does not change the hash.
    pub config_hash: String,
    pub code_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

/// Hash canonical `(key, value)` pairs. The caller must pass them in a
/// canonical (sorted) order; `config::parse` already does.
pub fn config_hash(pairs: &[(String, String)]) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in pairs {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
        hasher.update(b"\n");
    }
    format!("{:x}", hasher.finalize())
}

impl RunManifest {
    pub fn new(command: &str, pairs: &[(String, String)], started: Instant) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash(pairs),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Write the manifest as `manifest.json` in `dir` and list itself in
    /// its own output list.
    pub fn write(mut self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        self.outputs.push(path.display().to_string());
        let body = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::Io(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}
