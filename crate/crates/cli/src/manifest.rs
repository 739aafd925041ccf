use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{DensityArgs, SimulateArgs, VerifyArgs};
use crate::{density, simulate, verify, CliError, CliResult, Status};

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub master_seed: Option<u64>,
    /// `flag` or `entropy`.
    pub seed_source: Option<String>,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
    #[serde(default)]
    pub summary: Value,
}

impl RunManifest {
    pub fn new(command: &str, params: &impl Serialize, seed: Option<(u64, bool)>, elapsed: Duration) -> CliResult<Self> {
        Ok(Self {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            master_seed: seed.map(|s| s.0),
            seed_source: seed.map(|s| if s.1 { "flag" } else { "entropy" }.to_string()),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: elapsed.as_secs_f64(),
            outputs: Vec::new(),
            summary: Value::Null,
        })
    }

    pub fn with_output(mut self, p: &Path) -> Self {
        self.outputs.push(p.to_path_buf());
        self
    }

    pub fn with_summary(mut self, v: Value) -> Self {
        self.summary = v;
        self
    }

    pub fn write_beside(&self, out: &Path) -> CliResult<PathBuf> {
        let path = manifest_path(out);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Seed from the flag, else from the OS entropy source.
pub fn resolve_seed(flag: Option<u64>) -> (u64, bool) {
    match flag {
        Some(s) => (s, true),
        None => (rand::random::<u64>(), false),
    }
}

pub fn replay(path: &Path, threads: Option<usize>) -> CliResult<Status> {
    let text = fs::read_to_string(path)?;
    let m: RunManifest = serde_json::from_str(&text)?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("manifest parameters: {e}"));
    match m.command.as_str() {
        "simulate" => {
            let mut a: SimulateArgs = serde_json::from_value(m.params).map_err(bad)?;
            a.seed = m.master_seed;
            simulate::run(&a, threads).map(|_| Status::Ok)
        }
        "density" => {
            let a: DensityArgs = serde_json::from_value(m.params).map_err(bad)?;
            density::run(&a).map(|_| Status::Ok)
        }
        "verify" => {
            let mut a: VerifyArgs = serde_json::from_value(m.params).map_err(bad)?;
            a.seed = m.master_seed;
            verify::run(&a, threads)
        }
        other => Err(CliError::Usage(format!("cannot replay command {other}"))),
    }
}
