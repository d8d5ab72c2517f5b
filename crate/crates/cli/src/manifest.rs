//! Reproducibility manifests.
//!
//! Every command writes a manifest next to its outputs: the command name, the
//! fully resolved configuration, and a SHA-256 per input and output file.
//! Manifests carry no timestamps or absolute paths — files are keyed by name
//! only — so rerunning a command in any directory yields byte-identical
//! manifests, and a manifest diff is exactly a content diff.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use beamsim_core::hashing::sha256_file;
use serde::Serialize;

use crate::config::RunConfig;

/// Record of one command invocation and the hashes of everything it touched.
#[derive(Debug, Serialize)]
pub struct Manifest {
    /// Subcommand that produced the outputs.
    pub command: String,
    /// Fully resolved configuration, in config-file key order.
    pub config: Vec<(String, String)>,
    /// SHA-256 of each input file, keyed by file name.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of each output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    /// Starts a manifest for `command` with the configuration echo.
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            command: command.to_string(),
            config: config.to_kv(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    fn file_key(path: &Path) -> String {
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    }

    /// Hashes an input file into the manifest.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)
            .with_context(|| format!("hashing input {}", path.display()))?;
        self.inputs.insert(Self::file_key(path), hash);
        Ok(())
    }

    /// Hashes an output file into the manifest.
    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)
            .with_context(|| format!("hashing output {}", path.display()))?;
        self.outputs.insert(Self::file_key(path), hash);
        Ok(())
    }

    /// Writes the manifest as pretty JSON under `out_dir`.
    pub fn write(&self, out_dir: &Path, name: &str) -> Result<std::path::PathBuf> {
        let path = out_dir.join(name);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}
