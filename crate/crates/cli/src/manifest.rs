//! Run manifest: what each stage read and wrote, with content digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StageRecord {
    /// Path relative to the stage directory (or as given) to SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages: BTreeMap<String, StageRecord>,
    /// SHA-256 over everything above except the wall-clock times.
    pub digest: String,
}

#[derive(Serialize)]
struct Digestible<'a> {
    tool: &'a str,
    version: &'a str,
    config_hash: &'a str,
    seed: u64,
    stages: BTreeMap<&'a str, DigestibleStage<'a>>,
}

#[derive(Serialize)]
struct DigestibleStage<'a> {
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
    seed: Option<u64>,
}

impl Manifest {
    pub fn new(config_hash: &str, seed: u64) -> Manifest {
        let mut m = Manifest {
            tool: "fvkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash.into(),
            seed,
            stages: BTreeMap::new(),
            digest: String::new(),
        };
        m.digest = m.compute_digest();
        m
    }

    pub fn compute_digest(&self) -> String {
        let d = Digestible {
            tool: &self.tool,
            version: &self.version,
            config_hash: &self.config_hash,
            seed: self.seed,
            stages: self
                .stages
                .iter()
                .map(|(k, s)| (k.as_str(), DigestibleStage { inputs: &s.inputs, outputs: &s.outputs, seed: s.seed }))
                .collect(),
        };
        let bytes = serde_json::to_vec(&d).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) {
        self.stages.insert(stage.into(), record);
        self.digest = self.compute_digest();
    }

    /// The existing manifest when it was written for the same
    /// configuration, otherwise a fresh one.
    pub fn open(dir: &Path, config_hash: &str, seed: u64) -> Manifest {
        let path = dir.join(MANIFEST_FILE);
        fs::read(&path)
            .ok()
            .and_then(|b| serde_json::from_slice::<Manifest>(&b).ok())
            .filter(|m| m.config_hash == config_hash && m.seed == seed && m.version == env!("CARGO_PKG_VERSION"))
            .unwrap_or_else(|| Manifest::new(config_hash, seed))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digests keyed by path relative to `root` when inside it.
pub fn digest_files(root: &Path, paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for p in paths {
        let key = p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/");
        out.insert(key, file_digest(p)?);
    }
    Ok(out)
}
