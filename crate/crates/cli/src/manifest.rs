//! Run manifests: everything needed to repeat a run byte for byte.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Fully resolved command arguments.
    pub params: serde_json::Value,
    /// SHA-256 of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every output file, keyed by path relative to the output
    /// directory.
    pub outputs: BTreeMap<String, String>,
    pub master_seed: u64,
    pub engine_version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value, master_seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            master_seed,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: 0.0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = hash_path(path).map_err(CliError::io(path))?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Hashes every regular file below `dir` except the manifest itself.
    pub fn record_outputs(&mut self, dir: &Path) -> Result<(), CliError> {
        self.outputs = hash_tree(dir).map_err(CliError::io(dir))?;
        self.outputs.remove(MANIFEST_FILE);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

pub fn hash_reader<R: Read>(mut r: R) -> io::Result<String> {
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Hash of a file, or of all files below a directory (sorted by relative
/// path, each contributing its name and digest).
pub fn hash_path(path: &Path) -> io::Result<String> {
    if path.is_dir() {
        let tree = hash_tree(path)?;
        let mut h = Sha256::new();
        for (name, digest) in &tree {
            h.update(name.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update(b"\n");
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    } else {
        hash_reader(File::open(path)?)
    }
}

pub fn hash_tree(dir: &Path) -> io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("below root");
                let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                out.insert(key, hash_reader(File::open(&p)?)?);
            }
        }
    }
    Ok(out)
}
