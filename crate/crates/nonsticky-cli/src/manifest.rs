//! Run manifests: the non-deterministic provenance of one invocation.
//!
//! The manifest is written before the study starts (with `finished_at`
//! null) and finalised after the artifacts land, so an interrupted run
//! leaves an unfinished manifest behind as evidence.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    /// SHA-256 of the raw config file bytes.
    pub config_sha256: String,
    pub seed: u64,
    pub workers: usize,
    pub code_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub outputs: ManifestOutputs,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestOutputs {
    pub results_csv: PathBuf,
    pub summary_json: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn begin(
        config_path: &Path,
        config_bytes: &[u8],
        seed: u64,
        workers: usize,
        results_csv: PathBuf,
        summary_json: PathBuf,
    ) -> Self {
        RunManifest {
            config_path: config_path.display().to_string(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            workers,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now_rfc3339(),
            finished_at: None,
            outputs: ManifestOutputs {
                results_csv,
                summary_json,
            },
        }
    }

    pub fn finalize(&mut self) {
        self.finished_at = Some(now_rfc3339());
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serialises");
        bytes.push(b'\n');
        std::fs::write(path, bytes)
    }
}
