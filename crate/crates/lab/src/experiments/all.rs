//! The composite suite: every atomic experiment, one output tree.
//!
//! Each experiment gets its configuration derived from the suite config
//! (same grid, domain, seeds — only the experiment kind and subdirectory
//! change) and runs through the ordinary [`execute`] path into its own
//! subdirectory, so a suite run leaves exactly the datasets and manifests
//! eight single runs would.  Workers draw experiments from a shared list,
//! so `threads > 1` parallelizes across experiments while every dataset
//! stays byte-identical to a sequential run: each experiment's output
//! depends only on its own derived config, never on scheduling.
//!
//! On top the suite writes `summary.json` — experiments, checks, verdicts,
//! deliberately free of timestamps so reruns are byte-identical — and a
//! root manifest whose stages record per-experiment wall time.

use super::{execute, RunRecord};
use crate::config::{ExperimentKind, RunConfig};
use crate::io;
use crate::manifest::{write_manifest, CheckResult, Outcome, StageTime};
use crate::outdir::OutputDir;
use crate::{LabError, Result};
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime};

#[derive(Serialize)]
struct ExperimentSummary {
    experiment: String,
    passed: bool,
    checks: Vec<CheckResult>,
}

#[derive(Serialize)]
struct SuiteSummary {
    experiments: Vec<ExperimentSummary>,
    passed: bool,
}

/// Runs the full suite under `<root>/<subdir>` with up to `threads`
/// parallel workers, merging every experiment's outcome into one record.
/// A failed experiment becomes a failed `<name>/run` check rather than
/// aborting the suite, so the remaining experiments still run and the
/// summary reports the complete picture.
pub fn run_suite(base: &RunConfig, root: &OutputDir, threads: usize) -> Result<RunRecord> {
    if base.experiment != ExperimentKind::All {
        return Err(LabError::Assertion(format!(
            "run_suite requires the composite experiment, got `{}`",
            base.experiment.as_str()
        )));
    }
    let suite_dir = root.subdir(base.subdir_name())?;
    let started = SystemTime::now();

    let kinds = ExperimentKind::suite();
    let derived: Vec<RunConfig> = kinds
        .iter()
        .map(|&kind| {
            let mut cfg = base.clone();
            cfg.experiment = kind;
            cfg.run.subdir = None;
            cfg
        })
        .collect();

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, u128, Result<RunRecord>)>> = Mutex::new(Vec::new());
    let workers = threads.max(1).min(derived.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= derived.len() {
                    break;
                }
                let clock = Instant::now();
                let record = execute(&derived[i], &suite_dir);
                let wall = clock.elapsed().as_millis();
                results.lock().unwrap().push((i, wall, record));
            });
        }
    });
    let mut results = results.into_inner().expect("suite workers cannot poison the lock");
    results.sort_by_key(|(i, _, _)| *i);

    let mut merged = Outcome::default();
    let mut experiments = Vec::new();
    for (i, wall_ms, record) in results {
        let name = kinds[i].as_str();
        merged.stages.push(StageTime {
            name: name.to_string(),
            wall_ms,
        });
        match record {
            Ok(rec) => {
                let passed = rec.outcome.all_pass();
                let mut checks = Vec::new();
                for c in rec.outcome.checks {
                    merged.checks.push(CheckResult {
                        name: format!("{name}/{}", c.name),
                        pass: c.pass,
                        detail: c.detail.clone(),
                    });
                    checks.push(c);
                }
                for w in rec.outcome.warnings {
                    merged.warn(format!("{name}: {w}"));
                }
                experiments.push(ExperimentSummary {
                    experiment: name.to_string(),
                    passed,
                    checks,
                });
            }
            Err(e) => {
                let detail = format!("experiment aborted: {e}");
                merged.check(&format!("{name}/run"), false, detail.clone());
                experiments.push(ExperimentSummary {
                    experiment: name.to_string(),
                    passed: false,
                    checks: vec![CheckResult {
                        name: "run".to_string(),
                        pass: false,
                        detail,
                    }],
                });
            }
        }
    }

    let passed = merged.all_pass();
    io::write_json(
        &suite_dir,
        "summary.json",
        &SuiteSummary {
            experiments,
            passed,
        },
    )?;
    write_manifest(&suite_dir, base, started, &merged)?;
    Ok(RunRecord {
        outcome: merged,
        dir: suite_dir,
    })
}
