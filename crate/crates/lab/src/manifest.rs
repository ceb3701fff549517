//! Run manifests: the audit record every experiment leaves behind.
//!
//! A manifest echoes the fully-resolved configuration, its SHA-256 hash,
//! the crate version, wall-clock timing per stage, and the pass/fail
//! outcome of every check. It is written atomically so a crash never
//! leaves a half-written record. Timestamps make manifests the one file
//! that is *not* byte-identical across reruns; the datasets are.

use crate::config::RunConfig;
use crate::outdir::OutputDir;
use crate::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// SHA-256 of the canonical config serialization, `sha256:` prefixed.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(cfg.canonical_json().as_bytes());
    format!("sha256:{}", hex::encode(hasher.finalize()))
}

/// Wall time of one named stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub name: String,
    pub wall_ms: u128,
}

/// One named pass/fail check with a human-readable detail line.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything an experiment reports back to the harness.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub stages: Vec<StageTime>,
}

impl Outcome {
    /// Records one check and returns whether it passed.
    pub fn check(&mut self, name: &str, pass: bool, detail: String) -> bool {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass,
            detail,
        });
        pass
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Times `body` as stage `name`, keeping its result.
    pub fn stage<T>(&mut self, name: &str, body: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let result = body(self);
        self.stages.push(StageTime {
            name: name.to_string(),
            wall_ms: start.elapsed().as_millis(),
        });
        result
    }
}

/// The on-disk manifest schema.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub stages: Vec<StageTime>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub passed: bool,
    /// The fully-resolved configuration, every field echoed.
    pub config: RunConfig,
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Assembles the manifest for a finished (or aborted) run and writes it
/// atomically as `manifest.json` in `dir`.
pub fn write_manifest(
    dir: &OutputDir,
    cfg: &RunConfig,
    started: SystemTime,
    outcome: &Outcome,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        experiment: cfg.experiment.as_str().to_string(),
        config_hash: config_hash(cfg),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: unix_ms(started),
        finished_unix_ms: unix_ms(SystemTime::now()),
        stages: outcome.stages.clone(),
        checks: outcome.checks.clone(),
        warnings: outcome.warnings.clone(),
        passed: outcome.all_pass(),
        config: cfg.clone(),
    };
    crate::io::write_json(dir, "manifest.json", &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentKind, RunConfig};
    use tempfile::tempdir;

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = RunConfig::defaults(ExperimentKind::Simulate);
        let b = RunConfig::defaults(ExperimentKind::Simulate);
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut c = RunConfig::defaults(ExperimentKind::Simulate);
        c.grid.nx = 256;
        assert_ne!(config_hash(&a), config_hash(&c));
        assert!(config_hash(&a).starts_with("sha256:"));
        assert_eq!(config_hash(&a).len(), "sha256:".len() + 64);
    }

    #[test]
    fn manifest_lands_atomically_with_all_fields() {
        let dir = tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let cfg = RunConfig::defaults(ExperimentKind::Barrier);
        let mut outcome = Outcome::default();
        outcome
            .stage("survey", |o| {
                o.check("fits", true, "spread 0.03".into());
                Ok(())
            })
            .unwrap();
        let started = SystemTime::now();
        let m = write_manifest(&out, &cfg, started, &outcome).unwrap();
        assert!(m.passed);
        let text = std::fs::read_to_string(out.path().join("manifest.json")).unwrap();
        assert!(text.contains("\"experiment\": \"barrier\""));
        assert!(text.contains("\"config_hash\": \"sha256:"));
        assert!(text.contains("\"survey\""));
        assert!(text.contains("\"fits\""));
        assert!(text.ends_with('\n'));
        assert!(!out.path().join("manifest.tmp").exists());
    }

    #[test]
    fn outcome_tracks_failures() {
        let mut o = Outcome::default();
        assert!(o.all_pass());
        o.check("good", true, String::new());
        o.check("bad", false, "off by 2".into());
        assert!(!o.all_pass());
    }
}
