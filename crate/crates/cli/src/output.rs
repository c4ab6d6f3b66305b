//! Run directories and their manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a C,
    inputs: &'a [FileEntry],
    outputs: &'a [FileEntry],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<out>/<command>-<seed>/`, recording every file written into it.
pub struct RunDir {
    root: PathBuf,
    command: &'static str,
    seed: u64,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
}

impl RunDir {
    pub fn create(out: &Path, command: &'static str, seed: u64) -> Result<Self> {
        let root = out.join(format!("{command}-{seed}"));
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root, command, seed, inputs: Vec::new(), outputs: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Records an input file's hash in the manifest.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileEntry { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    /// Runs `f` against an in-memory buffer and writes the result.
    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> qwgan::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).with_context(|| format!("rendering {name}"))?;
        self.write(name, &buf)
    }

    /// Writes `manifest.json` and returns the run directory.
    pub fn finish<C: Serialize>(self, config: &C) -> Result<PathBuf> {
        let manifest = Manifest {
            command: self.command,
            seed: self.seed,
            config,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(self.root)
    }
}
