//! Run manifests, the output writer and re-execution checks.

use super::config::Config;
use super::runner::{execute, RunOutput, SeedRecord};
use super::schema::validate;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// Canonical configuration text; re-parsing it reproduces the run.
    pub config: String,
    pub graph_hashes: BTreeMap<String, String>,
    pub seeds: Vec<SeedRecord>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputRecord>,
    pub breaches: Vec<String>,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Result of [`run_config`].
#[derive(Clone, Debug)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub dir: PathBuf,
}

/// Parses, validates and executes a configuration, then writes every output and the
/// manifest into `dir`. Files listed by a manifest already in `dir` are removed
/// first so each output belongs to exactly one manifest.
pub fn run_config(text: &str, dir: &Path) -> Result<RunReport> {
    let cfg = Config::parse(text)?;
    let v = validate(&cfg)?;
    let start = Instant::now();
    let out = execute(&v)?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(dir)?;
    let old = dir.join(MANIFEST_FILE);
    if old.exists() {
        if let Ok(m) = serde_json::from_str::<RunManifest>(&fs::read_to_string(&old)?) {
            for o in m.outputs {
                let _ = fs::remove_file(dir.join(o.file));
            }
        }
    }
    let manifest = write_outputs(&cfg, v.experiment, out, wall, dir)?;
    Ok(RunReport { manifest, dir: dir.to_path_buf() })
}

// The single writer: outputs go to disk one after another in run order.
fn write_outputs(cfg: &Config, experiment: &str, out: RunOutput, wall: f64, dir: &Path) -> Result<RunManifest> {
    let mut outputs = Vec::new();
    for (name, body) in &out.files {
        fs::write(dir.join(name), body.as_bytes())?;
        outputs.push(OutputRecord { file: name.clone(), sha256: sha_hex(body.as_bytes()), bytes: body.len() as u64 });
    }
    let manifest = RunManifest {
        tool: "graphrep".into(),
        version: TOOL_VERSION.into(),
        experiment: experiment.into(),
        config: cfg.serialize(),
        graph_hashes: out.graphs.into_iter().collect(),
        seeds: out.seeds,
        workers: crate::par::worker_count(),
        wall_clock_seconds: wall,
        outputs,
        breaches: out.breaches,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileStatus {
    Match,
    Mismatch(String),
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub entries: Vec<(String, FileStatus)>,
}

impl VerifyReport {
    pub fn all_match(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|(_, s)| *s == FileStatus::Match)
    }

    pub fn lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|(f, s)| match s {
                FileStatus::Match => format!("MATCH    {f}"),
                FileStatus::Mismatch(why) => format!("MISMATCH {f}: {why}"),
            })
            .collect()
    }
}

/// Re-executes the manifest's configuration in memory and byte-compares every
/// output with the file next to the manifest and with its recorded digest.
pub fn verify(manifest_path: &Path) -> Result<VerifyReport> {
    let text = fs::read_to_string(manifest_path)?;
    let m: RunManifest = serde_json::from_str(&text)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut on_disk = Vec::new();
    for o in &m.outputs {
        let p = dir.join(&o.file);
        let bytes = fs::read(&p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
        on_disk.push(bytes);
    }
    let v = validate(&Config::parse(&m.config)?)?;
    let rerun = execute(&v)?;
    let fresh: BTreeMap<&str, &str> = rerun.files.iter().map(|(n, b)| (n.as_str(), b.as_str())).collect();
    let mut entries = Vec::new();
    for (o, disk) in m.outputs.iter().zip(&on_disk) {
        let status = if sha_hex(disk) != o.sha256 {
            FileStatus::Mismatch("file differs from its recorded digest".into())
        } else {
            match fresh.get(o.file.as_str()) {
                None => FileStatus::Mismatch("re-run did not produce this file".into()),
                Some(b) if b.as_bytes() != disk.as_slice() => FileStatus::Mismatch("re-run output differs".into()),
                Some(_) => FileStatus::Match,
            }
        };
        entries.push((o.file.clone(), status));
    }
    for (name, _) in &rerun.files {
        if !m.outputs.iter().any(|o| &o.file == name) {
            entries.push((name.clone(), FileStatus::Mismatch("re-run produced a file the manifest does not list".into())));
        }
    }
    Ok(VerifyReport { entries })
}
