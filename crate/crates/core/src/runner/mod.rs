//! Scenario-driven runs: parse a config, execute it, write artifacts and a manifest.

mod execute;
mod scenario;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use execute::{execute, Artifact, BOUND_TOL};
pub use scenario::{parse_scenario, parse_scenario_str, Command, Params, Plan, Scenario};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    fn keeps(self, name: &str) -> bool {
        match self {
            Format::Both => true,
            Format::Csv => name.ends_with(".csv"),
            Format::Json => name.ends_with(".json"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    /// Replaces the scenario output directory.
    pub out: Option<PathBuf>,
    /// Worker threads; results never depend on it.
    pub threads: Option<usize>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_name: String,
    pub command: Command,
    /// SHA-256 of the resolved scenario as compact JSON.
    pub scenario_hash: String,
    pub toolkit_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub seed: u64,
    pub threads: usize,
    pub format: Format,
    pub files: Vec<FileEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn scenario_hash(sc: &Scenario) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(sc)?))
}

/// Runs the scenario and writes its files plus `manifest.json` into the
/// output directory. Files are staged next to it first; on failure the staging
/// directory is removed and the output directory is left untouched.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunManifest> {
    let mut sc = scenario.clone();
    if let Some(s) = opts.seed {
        sc.seed = s;
    }
    let out = opts
        .out
        .clone()
        .or_else(|| sc.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
    sc.output = None;
    let plan = sc.plan()?;
    let started = unix_now();
    let threads = opts.threads.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| execute(&sc, &plan))?;

    let stage = staging_dir(&out);
    let res = write_staged(&stage, &out, &sc, artifacts, opts.format, started, threads);
    if res.is_err() {
        let _ = std::fs::remove_dir_all(&stage);
    }
    res
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!(".{name}.staging-{}", std::process::id()))
}

fn write_staged(
    stage: &Path,
    out: &Path,
    sc: &Scenario,
    artifacts: Vec<Artifact>,
    format: Format,
    started: u64,
    threads: usize,
) -> Result<RunManifest> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let _ = std::fs::remove_dir_all(stage);
    std::fs::create_dir_all(stage)?;
    let mut files = Vec::new();
    for a in artifacts.into_iter().filter(|a| format.keeps(&a.name)) {
        std::fs::write(stage.join(&a.name), &a.bytes)?;
        files.push(FileEntry { path: a.name, sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() as u64 });
    }
    let manifest = RunManifest {
        scenario_name: sc.name.clone(),
        command: sc.command,
        scenario_hash: scenario_hash(sc)?,
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        started_unix: started,
        finished_unix: unix_now(),
        seed: sc.seed,
        threads,
        format,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(stage.join(MANIFEST_NAME), bytes)?;
    std::fs::create_dir_all(out)?;
    let mut names: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    names.push(MANIFEST_NAME);
    for n in names {
        std::fs::rename(stage.join(n), out.join(n))?;
    }
    std::fs::remove_dir_all(stage)?;
    Ok(manifest)
}

/// Outcome of re-hashing the files listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub manifest: RunManifest,
    pub verified: bool,
    /// Files that are missing or whose checksum differs.
    pub mismatches: Vec<String>,
}

/// Reads `dir/manifest.json` (or a manifest file path) and re-hashes every listed file.
pub fn inspect_manifest(path: &Path) -> Result<ManifestCheck> {
    let (dir, file) = if path.is_dir() { (path.to_path_buf(), path.join(MANIFEST_NAME)) } else {
        (path.parent().map(Path::to_path_buf).unwrap_or_default(), path.to_path_buf())
    };
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(&file)?)?;
    let mut mismatches = Vec::new();
    for f in &manifest.files {
        match std::fs::read(dir.join(&f.path)) {
            Ok(b) if sha256_hex(&b) == f.sha256 => {}
            _ => mismatches.push(f.path.clone()),
        }
    }
    Ok(ManifestCheck { verified: mismatches.is_empty(), manifest, mismatches })
}
