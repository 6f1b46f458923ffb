//! Atomic file output and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Writes `bytes` to a temp file beside `path`, then renames it into place,
/// so readers see either the old file, nothing, or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command. Two runs whose manifests agree
/// except for `created_unix` and `jobs` write identical data files.
#[derive(Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub seeds: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<PathBuf>,
    pub jobs: Option<usize>,
    pub created_unix: u64,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(command: &'static str, config: C) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seeds: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            jobs: None,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    pub fn input(mut self, path: &Path, contents: &str) -> Self {
        self.inputs.push(InputFile { path: path.to_path_buf(), sha256: sha256_hex(contents.as_bytes()) });
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_atomic(path, json.as_bytes())
    }
}

/// `<out>.manifest.json`, written next to a single output file.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
