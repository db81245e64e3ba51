use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::Context as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What every command reports back. With `--json` the payload is printed;
/// otherwise `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 over the command line arguments and the bytes of every file read.
    pub inputs_digest: String,
    pub results: Value,
    pub versions: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
}

pub struct Outcome {
    pub results: Value,
    pub text: String,
    pub converged: bool,
}

/// A computation that ran but did not reach its target; exit code 1.
#[derive(Debug)]
pub struct NonConvergence(pub String);

impl std::fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "did not converge: {}", self.0)
    }
}

impl std::error::Error for NonConvergence {}

pub struct Context {
    pub tol: f64,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    files: Vec<Vec<u8>>,
    start: Instant,
}

impl Context {
    pub fn new(tol: f64, seed: Option<u64>, restarts: Option<usize>) -> Self {
        Context { tol, seed, restarts, files: Vec::new(), start: Instant::now() }
    }

    /// Reads a file and folds its bytes into the input digest.
    pub fn read_file(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.files.push(bytes.clone());
        Ok(bytes)
    }

    pub fn finish(self, command: String, args: &impl Serialize, results: Value) -> RunReport {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(args).expect("arguments serialize"));
        for f in &self.files {
            h.update((f.len() as u64).to_le_bytes());
            h.update(f);
        }
        let versions = [
            ("exclusivity".to_string(), exclusivity::VERSION.to_string()),
            ("exclusivity-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]
        .into();
        RunReport {
            command,
            inputs_digest: hex::encode(h.finalize()),
            results,
            versions,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}
