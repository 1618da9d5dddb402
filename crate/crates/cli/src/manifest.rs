//! Run manifest: what was run, what came out, and checksums of every file.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeUnits {
    /// The convention used for `t_ms` columns.
    pub convention: String,
    pub ms_per_unit: f64,
    /// Milliseconds per unit under the angular-rate reading of the frequency.
    pub ms_per_unit_angular: f64,
    /// Milliseconds per unit under the cyclic (Hz) reading.
    pub ms_per_unit_hertz: f64,
    pub um_per_unit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// The resolved configuration as `key → value` text.
    pub config: Map<String, Value>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub time_units: TimeUnits,
    pub derived: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn time_units(cfg: &ExperimentConfig) -> TimeUnits {
    use atomtronics_core::units::TimeConvention;
    let mut p = cfg.physical.clone();
    let ms_per_unit = p.time_unit_ms();
    p.time_convention = TimeConvention::AngularRate;
    let angular = p.time_unit_ms();
    p.time_convention = TimeConvention::CyclicHertz;
    let hertz = p.time_unit_ms();
    TimeUnits {
        convention: cfg.physical.time_convention.name().into(),
        ms_per_unit,
        ms_per_unit_angular: angular,
        ms_per_unit_hertz: hertz,
        um_per_unit: cfg.physical.length_unit_um(),
    }
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, started_unix: f64) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: cfg.kind.name().into(),
            config: cfg
                .pairs()
                .into_iter()
                .map(|(k, v)| (k.to_string(), Value::String(v)))
                .collect(),
            started_unix,
            finished_unix: started_unix,
            time_units: time_units(cfg),
            derived: Map::new(),
            diagnostics: Map::new(),
            files: Vec::new(),
        }
    }

    pub fn derive(&mut self, key: &str, value: impl Into<Value>) {
        self.derived.insert(key.into(), value.into());
    }

    pub fn diagnose(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.into(), value.into());
    }

    /// Checksum every regular file under `dir` (recursively, sorted) except
    /// the manifest itself, then write the manifest atomically.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.finished_unix = unix_now();
        let mut paths = Vec::new();
        collect_files(dir, &mut paths)?;
        paths.sort();
        self.files = paths
            .iter()
            .filter(|p| {
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                name != MANIFEST_NAME && !name.ends_with(".tmp")
            })
            .map(|p| file_entry(dir, p))
            .collect::<Result<_>>()?;
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&self)?;
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if p.is_file() {
            out.push(p);
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn file_entry(root: &Path, p: &Path) -> Result<FileEntry> {
    let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    let rel = p.strip_prefix(root).unwrap_or(p);
    Ok(FileEntry {
        path: rel.to_string_lossy().replace('\\', "/"),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

/// Write to a sibling temporary file and rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

/// Check that every listed file exists with the recorded checksum.
pub fn verify(dir: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let m: RunManifest = serde_json::from_str(&text)?;
    let mut problems = Vec::new();
    for f in &m.files {
        match std::fs::read(dir.join(&f.path)) {
            Ok(bytes) if sha256_hex(&bytes) == f.sha256 && bytes.len() as u64 == f.bytes => {}
            Ok(_) => problems.push(format!("{} does not match its checksum", f.path)),
            Err(e) => problems.push(format!("{}: {e}", f.path)),
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentKind};

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn lists_and_verifies_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "x\n1\n").unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/b.bin"), [1u8, 2, 3]).unwrap();
        let cfg = ExperimentConfig::defaults(ExperimentKind::Ground);
        let mut m = RunManifest::new(&cfg, unix_now());
        m.derive("coupling", 2.0);
        m.finish(dir.path()).unwrap();
        assert!(verify(dir.path()).unwrap().is_empty());
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
        let names: Vec<_> = back.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["a.csv", "sub/b.bin"]);
        assert!((back.time_units.ms_per_unit_angular - 1.953125).abs() < 1e-12);
        assert!((back.time_units.ms_per_unit_hertz - 1.953125 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert!(!dir.path().join("manifest.json.tmp").exists());
        std::fs::write(dir.path().join("a.csv"), "tampered").unwrap();
        assert_eq!(verify(dir.path()).unwrap().len(), 1);
    }
}
