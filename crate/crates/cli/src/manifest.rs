//! Run manifests: every command records its resolved configuration, input
//! and output digests, and wall-clock timings, so a run can be audited and
//! reproduced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: String,
    version: String,
    command: String,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    timings_ms: BTreeMap<String, u128>,
}

/// Collects manifest data over the life of one command invocation.
pub struct ManifestBuilder {
    command: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    stages: BTreeMap<String, u128>,
    started: Instant,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

impl ManifestBuilder {
    pub fn new(command: &'static str, config: serde_json::Value, seed: Option<u64>) -> Self {
        ManifestBuilder {
            command,
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            stages: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Write an output file and record its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(path, bytes)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn record_stage(&mut self, name: &str, started: Instant) {
        self.stages
            .insert(name.to_string(), started.elapsed().as_millis());
    }

    /// Finalize and write the manifest itself (not listed in outputs).
    pub fn finish(mut self, path: &Path) -> Result<(), CliError> {
        self.stages
            .insert("total".into(), self.started.elapsed().as_millis());
        let manifest = RunManifest {
            tool: "zonecast".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            timings_ms: self.stages,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::compute(format!("manifest serialization: {e}")))?;
        fs::write(path, json)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Default manifest location for single-file outputs:
/// `<command>.manifest.json` next to the primary output.
pub fn sibling_manifest(out: &Path, command: &str) -> PathBuf {
    let name = format!("{command}.manifest.json");
    out.parent()
        .map(|d| d.join(&name))
        .unwrap_or_else(|| PathBuf::from(&name))
}
