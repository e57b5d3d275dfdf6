use std::fs;
use std::path::{Path, PathBuf};

use capillarity::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a RunConfig,
    status: &'a str,
    failures: &'a [String],
    files: Vec<FileEntry>,
}

/// Output directory that remembers what was written into it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.record(name);
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, serde_json::to_string_pretty(value)? + "\n")
    }

    /// Registers a file written by other code under this directory.
    pub fn record(&mut self, name: &str) {
        let p = PathBuf::from(name);
        if !self.written.contains(&p) {
            self.written.push(p);
        }
    }

    /// Writes the manifest listing every recorded file with its hash.
    pub fn finish(mut self, command: &str, config: &RunConfig, failures: &[String]) -> Result<()> {
        self.written.sort();
        let mut files = Vec::with_capacity(self.written.len());
        for rel in &self.written {
            let bytes = fs::read(self.root.join(rel))?;
            files.push(FileEntry {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: hex(&Sha256::digest(&bytes)),
            });
        }
        let status = if failures.is_empty() { "pass" } else { "fail" };
        let m = Manifest { command, config, status, failures, files };
        fs::write(self.root.join(MANIFEST), serde_json::to_string_pretty(&m)? + "\n")?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
