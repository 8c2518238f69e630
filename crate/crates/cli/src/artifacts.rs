//! Output directory handling, self-describing artifacts and the run
//! manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const OUT_ENV: &str = "ANOMALYKIT_OUT";
pub const MANIFEST: &str = "manifest.json";

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `$ANOMALYKIT_OUT` when set and nonempty, else the configured directory.
pub fn output_root(configured: &str) -> PathBuf {
    match std::env::var(OUT_ENV) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(configured),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub config_hash: String,
    pub artifacts: Vec<ArtifactEntry>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub checks: Vec<CheckSummary>,
    pub warnings: Vec<String>,
    pub created_unix: u64,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    format_version: u32,
    config_hash: &'a str,
    kind: &'a str,
    data: &'a T,
}

/// Writes artifacts under one directory and records them for the manifest.
pub struct ArtifactWriter {
    dir: PathBuf,
    command: String,
    config_hash: String,
    artifacts: Vec<ArtifactEntry>,
    pub timings: BTreeMap<String, f64>,
    pub checks: Vec<CheckSummary>,
    pub warnings: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl ArtifactWriter {
    pub fn create(dir: PathBuf, command: &str, config_hash: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(ArtifactWriter {
            dir,
            command: command.into(),
            config_hash: config_hash.into(),
            artifacts: Vec::new(),
            timings: BTreeMap::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        self.artifacts.push(ArtifactEntry {
            path: name.into(),
            sha256: hex_digest(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// JSON wrapped with format version, config hash and a kind tag.
    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> Result<(), CliError> {
        let env = Envelope {
            format_version: FORMAT_VERSION,
            config_hash: &self.config_hash,
            kind,
            data,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV preceded by a `#` line carrying format version and config hash.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = format!("# anomalykit format {FORMAT_VERSION} config {}\n", self.config_hash);
        text.push_str(&header.join(","));
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(CheckSummary { name: name.into(), pass });
    }

    /// Writes the manifest; must be the last file of the run.
    pub fn finish(self) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            format_version: FORMAT_VERSION,
            command: self.command,
            config_hash: self.config_hash,
            artifacts: self.artifacts,
            timings: self.timings,
            checks: self.checks,
            warnings: self.warnings,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

/// Round-trip-exact float formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
