use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliResult, Failure};
use crate::io::{json_string, read_text, sha256_file, write_file};

/// Everything needed to reproduce a run: the canonical arguments, the
/// resolved configuration, and digests of inputs and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as they would be re-parsed.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// How random streams derive from the seed.
    pub streams: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], seed: Option<u64>, config: serde_json::Value, streams: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: args.to_vec(),
            seed,
            config,
            streams: streams.into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        self.outputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, json_string(self).as_bytes())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = read_text(path, "manifest")?;
        serde_json::from_str(&text).map_err(|e| Failure::corrupt(format!("manifest {}: {e}", path.display())))
    }
}
