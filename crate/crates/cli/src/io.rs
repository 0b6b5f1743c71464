//! File plumbing: validated JSON reads, atomic writes, run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Precondition(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Precondition(format!("cannot parse {}: {e}", path.display())))
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Internal(format!("cannot write {}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(err)?;
        }
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Record of one tool invocation, written next to the primary output.
/// Re-running `argv` reproduces every listed output byte-for-byte except
/// the manifest's own timestamps.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub started_utc: String,
    pub finished_utc: String,
    pub outputs: Vec<String>,
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    primary.with_extension("manifest.json")
}

pub fn write_manifest(
    command: &str,
    seeds: BTreeMap<String, u64>,
    artifacts: &[&Path],
    started: DateTime<Utc>,
    primary: &Path,
) -> Result<PathBuf, CliError> {
    let path = manifest_path(primary);
    let mut outputs: Vec<String> = artifacts.iter().map(|p| p.display().to_string()).collect();
    outputs.push(path.display().to_string());
    let manifest = RunManifest {
        tool: "shallownet".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        argv: std::env::args().collect(),
        seeds,
        started_utc: started.to_rfc3339_opts(SecondsFormat::Micros, true),
        finished_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
        outputs,
    };
    write_json(&path, &manifest)?;
    Ok(path)
}
