use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Provenance written next to every output artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments that reproduce the run.
    pub argv: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    /// SHA-256 of the resolved configuration below.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_clock_secs: f64,
    /// Timing measurements; like wall-clock, not reproducible.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timing: BTreeMap<String, f64>,
}

pub struct ManifestBuilder {
    started: Instant,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &impl Serialize) -> ManifestBuilder {
        let config = serde_json::to_value(config).expect("configs serialize");
        let digest = Sha256::digest(config.to_string().as_bytes());
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        ManifestBuilder {
            started: Instant::now(),
            manifest: RunManifest {
                command: command.to_string(),
                argv: std::env::args().skip(1).collect(),
                seeds: BTreeMap::new(),
                config_hash,
                config,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                wall_clock_secs: 0.0,
                timing: BTreeMap::new(),
            },
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.manifest.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.manifest.inputs.push(path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.manifest.outputs.push(path.display().to_string());
        self
    }

    pub fn timing(&mut self, name: &str, secs: f64) -> &mut Self {
        self.manifest.timing.insert(name.to_string(), secs);
        self
    }

    pub fn write(&mut self, path: &Path) -> Result<(), CliError> {
        self.manifest.wall_clock_secs = self.started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        write_file(path, &text)
    }
}

/// `out.json` -> `out.json.manifest.json`.
pub fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
