//! Output directories and their run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Record of one command run. Everything except `wall_clock_ms` is a
/// function of the inputs, the configuration, and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub wall_clock_ms: u64,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Collects a command's outputs and writes the manifest last.
pub struct OutputDir {
    dir: PathBuf,
    command: String,
    config: BTreeMap<String, String>,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config: BTreeMap::new(),
            seed: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.set("seed", seed);
    }

    /// Records an input file by digest.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), file_digest(path)?);
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes through a closure that renders into a buffer.
    pub fn write_with(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn finish(self) -> Result<RunManifest> {
        let config_hash = sha256_hex(serde_json::to_string(&(&self.command, &self.config))?.as_bytes());
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            config_hash,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_ms: self.started.elapsed().as_millis() as u64,
        };
        let path = self.dir.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn manifest_lists_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path(), "test").unwrap();
        out.seed(3);
        out.write("a.txt", b"hello").unwrap();
        let m = out.finish().unwrap();
        assert_eq!(m.outputs.len(), 1);
        assert_eq!(m.seed, Some(3));
        assert_eq!(RunManifest::load(tmp.path()).unwrap(), m);
    }
}
