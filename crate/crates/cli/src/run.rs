//! Output directories and their `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

/// Provenance record written last into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
    /// sha256 of the effective configuration text, when the command has one.
    pub config_digest: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Run {
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    pub fn new(command: &str, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                argv: std::env::args().collect(),
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: None,
                timestamp: chrono::Utc::now().to_rfc3339(),
                config_digest: None,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
        })
    }

    /// Records the digest of an input file. A missing file is left for the
    /// reader to report.
    pub fn input(&mut self, path: &Path) {
        if let Ok(bytes) = fs::read(path) {
            self.manifest
                .inputs
                .insert(path.display().to_string(), sha256_hex(&bytes));
        }
    }

    pub fn config(&mut self, text: &str) {
        self.manifest.config_digest = Some(sha256_hex(text.as_bytes()));
    }

    pub fn seed(&mut self, seed: u64) {
        self.manifest.seed = Some(seed);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn finish(self) -> Result<Manifest> {
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.manifest)
    }
}
