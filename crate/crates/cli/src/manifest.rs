//! Run manifests: enough context to replay a run and verify that the
//! replay produced byte-identical outputs. Written next to each output as
//! `<stem>.manifest.json`. Timestamps are unix epoch seconds; digests are
//! SHA-256 over the exact file bytes.

use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub artifact_version: &'static str,
    pub command_line: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub metadata: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<OutputDigest>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

impl RunManifest {
    pub fn start(params: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            params,
            seed,
            started_unix: unix_now(),
            finished_unix: 0.0,
            metadata: serde_json::Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn insert_metadata(&mut self, key: &str, value: serde_json::Value) {
        self.metadata.insert(key.to_string(), value);
    }

    /// Writes the output file and records its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        std::fs::write(path, bytes)?;
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Stamps the end time and writes the manifest next to `out`.
    pub fn finish(mut self, out: &Path) -> io::Result<PathBuf> {
        self.finished_unix = unix_now();
        let path = out.with_extension("manifest.json");
        let mut body = serde_json::to_string_pretty(&self).expect("manifest serializes");
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
