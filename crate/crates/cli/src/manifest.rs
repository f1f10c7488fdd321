//! Run manifests: everything needed to repeat a run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError, CliResult};
use crate::run_uniform::UniformOptions;
use crate::scenario::ScenarioConfig;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    Uniform { weights: Vec<f64>, options: UniformOptions },
    Empirical { input: PathBuf, scenario: ScenarioConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub invocation: Invocation,
    pub out_dir: PathBuf,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(invocation: Invocation, out_dir: &Path) -> Self {
        Manifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            invocation,
            out_dir: out_dir.to_path_buf(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "unsupported manifest version {}",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// Fails if any recorded input no longer has its recorded digest.
    pub fn verify_inputs(&self) -> CliResult<()> {
        for input in &self.inputs {
            let now = sha256_file(&input.path)?;
            if now != input.sha256 {
                return Err(CliError::Input(format!(
                    "{} changed since the run (sha256 {} != {})",
                    input.path.display(),
                    now,
                    input.sha256
                )));
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
