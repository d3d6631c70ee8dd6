//! Per-run manifest: configuration echo, versions and a digest per output.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use cflab_core::checkpoint::sha256_hex;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: C,
    pub catalog_checksum: String,
    pub started_unix: u64,
    pub wall_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Collects output files while a command runs.
pub struct Recorder {
    out: PathBuf,
    started: Instant,
    started_unix: u64,
    files: Vec<PathBuf>,
}

impl Recorder {
    pub fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes `contents` to `<out>/<name>` and records it.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.track(path.clone());
        Ok(path)
    }

    /// Records a file written by other means.
    pub fn track(&mut self, path: PathBuf) {
        if !self.files.contains(&path) {
            self.files.push(path);
        }
    }

    /// Writes `<out>/<stem>.manifest.json`.
    pub fn finish<C: Serialize>(
        self,
        stem: &str,
        command: &str,
        config: C,
        catalog_checksum: String,
    ) -> Result<PathBuf> {
        let mut files = Vec::new();
        for p in &self.files {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            files.push(FileEntry {
                path: p
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = Manifest {
            tool: "cflab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            catalog_checksum,
            started_unix: self.started_unix,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            files,
        };
        let path = self.out.join(format!("{stem}.manifest.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
