//! Run manifests and the per-directory writer.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Digest prefix of command, config echo and seeds.
    pub run_id: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub derived: serde_json::Value,
    pub timing: Timing,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn run_id(command: &str, config: &serde_json::Value, seeds: &[u64]) -> String {
    let text = serde_json::json!({ "command": command, "config": config, "seeds": seeds });
    sha256_hex(text.to_string().as_bytes())[..16].to_string()
}

impl Manifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Io(format!(
                "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }

    /// Checks every inventoried file's size and digest and rejects files
    /// the manifest does not list. Subdirectories are not inspected.
    pub fn validate_inventory(&self, dir: &Path) -> CliResult<()> {
        let mut listed = BTreeSet::new();
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.path))
                .map_err(|e| CliError::Io(format!("inventoried file {}: {e}", f.path)))?;
            if bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256 {
                return Err(CliError::Io(format!(
                    "{} does not match its digest",
                    f.path
                )));
            }
            listed.insert(f.path.clone());
        }
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            if !entry.file_type()?.is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            if name != MANIFEST && !listed.contains(&name) {
                return Err(CliError::Io(format!(
                    "orphan file {name} is not in the manifest"
                )));
            }
        }
        Ok(())
    }
}

/// Sole writer of one run directory. Files written before [`RunWriter::finish`]
/// are removed if the writer is dropped early.
pub struct RunWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
    done: bool,
}

impl RunWriter {
    /// Opens `dir`, removing the files of a previous run recorded there.
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        if dir.join(MANIFEST).exists() {
            if let Ok(old) = Manifest::load(dir) {
                for f in &old.files {
                    let _ = fs::remove_file(dir.join(&f.path));
                }
            }
            fs::remove_file(dir.join(MANIFEST))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            done: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        if name == MANIFEST || self.files.iter().any(|f| f.path == name) {
            return Err(CliError::Io(format!("{name} written twice")));
        }
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest with the inventory filled in.
    pub fn finish(mut self, mut manifest: Manifest) -> CliResult<Manifest> {
        manifest.files = self.files.clone();
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST), text)?;
        self.done = true;
        Ok(manifest)
    }
}

impl Drop for RunWriter {
    fn drop(&mut self) {
        if !self.done {
            for f in &self.files {
                let _ = fs::remove_file(self.dir.join(&f.path));
            }
        }
    }
}
