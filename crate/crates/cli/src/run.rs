use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// Record of one command invocation, written next to its primary output.
/// `args` is a complete, config-file-free argument list, so replaying it
/// reproduces the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub dataset_checksum: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, config: serde_json::Value, dataset_checksum: String) -> Self {
        Self {
            command: command.into(),
            args,
            config,
            tool_version: hgc_core::TOOL_VERSION.into(),
            dataset_checksum,
            started_at: timestamp(Utc::now()),
            finished_at: String::new(),
            outputs: Vec::new(),
        }
    }

    /// Stamp the finish time and write the manifest beside `primary`.
    pub fn finish(mut self, primary: &Path) -> Result<PathBuf> {
        self.finished_at = timestamp(Utc::now());
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing run manifest {}", path.display()))
    }
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `<output>.run.json`, a sibling of the output so the output itself stays
/// free of timestamps.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(OsString::from).unwrap_or_else(|| "out".into());
    name.push(".run.json");
    output.with_file_name(name)
}

/// Write through a temporary file in the same directory and rename it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

/// Absolute form of a path that may not exist yet.
pub fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(std::path::absolute(path)?)
}
