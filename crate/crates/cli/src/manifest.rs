//! Per-stage run manifests: content fingerprints tying every artifact to its
//! inputs, so any stage can detect stale upstream outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub tool_version: String,
    /// Input path (as given) -> content hash.
    pub inputs: BTreeMap<String, String>,
    /// Config snapshot for the stage.
    pub config: serde_json::Value,
    /// Output path relative to the stage directory -> content hash.
    pub outputs: BTreeMap<String, String>,
    pub wall_time_ms: u128,
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(kgtwin_core::fingerprint(&bytes))
}

/// Builder collecting fingerprints while a stage runs.
pub struct StageRun {
    stage: String,
    dir: PathBuf,
    inputs: BTreeMap<String, String>,
    config: serde_json::Value,
    outputs: BTreeMap<String, String>,
    started: Instant,
}

impl StageRun {
    pub fn start(stage: &str, dir: &Path, config: serde_json::Value) -> CliResult<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(StageRun {
            stage: stage.to_string(),
            dir: dir.to_path_buf(),
            inputs: BTreeMap::new(),
            config,
            outputs: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    /// Record an input file, verifying it against the upstream manifest when
    /// one governs it. A mismatch means the upstream stage must be re-run.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let hash = hash_file(path)?;
        if let Some((upstream_stage, recorded)) = recorded_hash(path)? {
            if recorded != hash {
                return Err(CliError::input(format!(
                    "stale upstream fingerprint for {}: re-run stage {upstream_stage}",
                    path.display()
                )));
            }
        }
        self.inputs.insert(path.display().to_string(), hash);
        Ok(())
    }

    /// Write an output file inside the stage directory and record its hash.
    pub fn write_output(&mut self, rel: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.insert(rel.to_string(), kgtwin_core::fingerprint(bytes));
        Ok(path)
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            stage: self.stage,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs,
            config: self.config,
            outputs: self.outputs,
            wall_time_ms: self.started.elapsed().as_millis(),
        };
        let path = self.dir.join(MANIFEST_FILE);
        let bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::input(e.to_string()))?;
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Hash recorded for `path` by the manifest of the stage directory that
/// contains it, if any.
fn recorded_hash(path: &Path) -> CliResult<Option<(String, String)>> {
    let absolute = path.canonicalize().ok();
    let mut dir = absolute.as_deref().unwrap_or(path).parent();
    let mut rel = PathBuf::from(path.file_name().unwrap_or_default());
    while let Some(current) = dir {
        let manifest_path = current.join(MANIFEST_FILE);
        if manifest_path.exists() {
            let manifest = load_manifest(&manifest_path)?;
            let key = rel.to_string_lossy().to_string();
            return Ok(manifest.outputs.get(&key).map(|h| (manifest.stage.clone(), h.clone())));
        }
        rel = PathBuf::from(current.file_name().unwrap_or_default()).join(rel);
        dir = current.parent();
    }
    Ok(None)
}

pub fn load_manifest(path: &Path) -> CliResult<RunManifest> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&content)
        .map_err(|e| CliError::input(format!("bad manifest {}: {e}", path.display())))
}

/// Require the manifest of an upstream stage directory.
pub fn require_stage(dir: &Path, stage: &str) -> CliResult<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(CliError::input(format!(
            "missing output of stage {stage}: run it first ({} not found)",
            path.display()
        )));
    }
    load_manifest(&path)
}

/// Every data file under the root must be recorded by exactly one manifest.
pub fn detect_orphans(root: &Path) -> CliResult<Vec<PathBuf>> {
    let mut manifests: Vec<(PathBuf, RunManifest)> = Vec::new();
    let mut files: Vec<PathBuf> = Vec::new();
    collect(root, &mut files)?;
    for file in &files {
        if file.file_name().is_some_and(|n| n == MANIFEST_FILE) {
            manifests.push((file.parent().unwrap().to_path_buf(), load_manifest(file)?));
        }
    }
    let mut orphans = Vec::new();
    for file in &files {
        if file.file_name().is_some_and(|n| n == MANIFEST_FILE) {
            continue;
        }
        let owners = manifests
            .iter()
            .filter(|(dir, manifest)| {
                file.strip_prefix(dir)
                    .ok()
                    .map(|rel| manifest.outputs.contains_key(&rel.to_string_lossy().to_string()))
                    .unwrap_or(false)
            })
            .count();
        if owners != 1 {
            orphans.push(file.clone());
        }
    }
    Ok(orphans)
}

fn collect(dir: &Path, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::input(format!("cannot list {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::input(e.to_string()))?;
        let path = entry.path();
        if path.is_dir() {
            collect(&path, files)?;
        } else {
            files.push(path);
        }
    }
    Ok(())
}
