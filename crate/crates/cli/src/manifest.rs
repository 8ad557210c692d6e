use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use textgat::graph::GRAPH_FORMAT_VERSION;
use textgat::train::CHECKPOINT_FORMAT_VERSION;
use textgat::Rng;

/// Everything needed to re-run one invocation: the argument vector, the
/// working directory it was resolved against, and hashes of what it wrote.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub cwd: PathBuf,
    pub args: serde_json::Value,
    pub rng: String,
    pub graph_format: u32,
    pub checkpoint_format: u32,
    /// Effective settings after config files and overrides.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub resolved: serde_json::Value,
    pub outputs: Vec<OutputHash>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputHash {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl Manifest {
    pub fn new(command: &str, argv: &[String], args: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: "textgat".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: argv.to_vec(),
            cwd: std::env::current_dir()?,
            args: serde_json::to_value(args)?,
            rng: Rng::ALGORITHM.into(),
            graph_format: GRAPH_FORMAT_VERSION,
            checkpoint_format: CHECKPOINT_FORMAT_VERSION,
            resolved: serde_json::Value::Null,
            outputs: Vec::new(),
        })
    }

    pub fn resolved(mut self, value: &impl Serialize) -> Result<Self> {
        self.resolved = serde_json::to_value(value)?;
        Ok(self)
    }

    /// Hashes `outputs` and writes the manifest to `path`.
    pub fn write(mut self, path: &Path, outputs: &[&Path]) -> Result<()> {
        for p in outputs {
            self.outputs.push(OutputHash {
                path: p.to_path_buf(),
                sha256: sha256_file(p)?,
            });
        }
        let json = serde_json::to_string_pretty(&self)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Manifest location for a command whose output is a single file.
pub fn beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
