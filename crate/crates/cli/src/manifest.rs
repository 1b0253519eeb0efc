//! Run manifests: what a batch produced, with checksums.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// One output file of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: PathBuf,
    /// `fnv1a64:<hex>` over the file bytes, present when the file was
    /// written successfully.
    pub checksum: Option<String>,
    /// "ok" or an error description.
    pub status: String,
}

/// Summary of a batch run, written as `manifest.json` next to the outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub base_seed: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<ManifestFile>,
}

impl RunManifest {
    pub fn new(base_seed: u64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: std::env::args().collect(),
            base_seed,
            wall_clock_seconds: 0.0,
            files: Vec::new(),
        }
    }

    pub fn all_ok(&self) -> bool {
        self.files.iter().all(|f| f.status == "ok")
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }
}

/// Checksum a file's bytes as `fnv1a64:<hex>`.
pub fn checksum_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in &bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    Ok(format!("fnv1a64:{hash:016x}"))
}
