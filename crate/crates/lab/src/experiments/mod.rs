//! The experiment registry: one module per subcommand, each exposing
//! `run(&RunConfig, &mut Outcome, &OutputDir) -> Result<()>`.
//!
//! Experiments are pure functions of their configuration: all randomness
//! is seeded from the config, all datasets are written through the
//! deterministic writers, and simulation runs are driven mark by mark so
//! an aborted run still leaves its partial trajectory on disk.

use crate::config::{ExperimentKind, RunConfig};
use crate::io::CsvTable;
use crate::manifest::{write_manifest, Outcome};
use crate::outdir::OutputDir;
use crate::{LabError, Result};
use heleshaw_core::error::CoreError;
use heleshaw_core::front::{run as front_run, InterfaceState, Snapshot, Trajectory};
use heleshaw_core::grid::{PeriodicGrid1D, StripGrid};
use heleshaw_core::schedule::Schedule;
use std::time::SystemTime;

pub mod all;
pub mod barrier;
pub mod deform;
pub mod harnack;
pub mod interp;
pub mod ladder;
pub mod linearize;
pub mod simulate;
pub mod supconv;

/// What an experiment run left behind: its outcome and where it wrote.
pub struct RunRecord {
    pub outcome: Outcome,
    pub dir: OutputDir,
}

/// Runs one experiment into `<root>/<subdir>`, writing the manifest
/// whether the body succeeds or aborts, so a failed run still leaves
/// its partial datasets plus an audit record behind.
pub fn execute(cfg: &RunConfig, root: &OutputDir) -> Result<RunRecord> {
    let dir = root.subdir(cfg.subdir_name())?;
    let started = SystemTime::now();
    let mut outcome = Outcome::default();
    let body = dispatch(cfg, &mut outcome, &dir);
    if let Err(e) = &body {
        outcome.warn(format!("run aborted: {e}"));
    }
    write_manifest(&dir, cfg, started, &outcome)?;
    body?;
    Ok(RunRecord { outcome, dir })
}

fn dispatch(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    match cfg.experiment {
        ExperimentKind::Simulate => simulate::run(cfg, outcome, dir),
        ExperimentKind::Linearize => linearize::run(cfg, outcome, dir),
        ExperimentKind::Harnack => harnack::run(cfg, outcome, dir),
        ExperimentKind::Ladder => ladder::run(cfg, outcome, dir),
        ExperimentKind::Supconv => supconv::run(cfg, outcome, dir),
        ExperimentKind::Deform => deform::run(cfg, outcome, dir),
        ExperimentKind::Barrier => barrier::run(cfg, outcome, dir),
        ExperimentKind::Interp => interp::run(cfg, outcome, dir),
        ExperimentKind::All => Err(LabError::Assertion(
            "the composite suite is driven by `all::run_suite`, not `execute`".into(),
        )),
    }
}

/// Builds the influx schedule declared by the config.
pub(crate) fn influx_of(cfg: &RunConfig) -> Result<Schedule> {
    Ok(Schedule::new(&cfg.influx.schedule)?)
}

/// The fixed multi-mode profile shape used by the wavy experiments:
/// three incommensurately phased modes with geometrically decaying
/// amplitudes, normalized so its sup is order one.
pub(crate) fn wavy_shape(x: f64) -> f64 {
    x.cos() + 0.5 * (2.0 * x + 0.7).cos() + 0.25 * (3.0 * x + 1.1).cos()
}

/// Initial interface `gamma0 + eps * shape(x)` on a fresh strip grid.
pub(crate) fn wavy_state(
    nx: usize,
    ny: usize,
    base_depth: f64,
    gamma0: f64,
    eps: f64,
) -> Result<InterfaceState> {
    let grid = StripGrid::new(PeriodicGrid1D::with_default_length(nx)?, ny)?;
    let gamma: Vec<f64> = (0..nx)
        .map(|i| gamma0 + eps * wavy_shape(grid.x().node(i)))
        .collect();
    Ok(InterfaceState::new(grid, base_depth, gamma, 0.0)?)
}

/// Flat initial interface at height `gamma0`.
pub(crate) fn planar_state(
    nx: usize,
    ny: usize,
    base_depth: f64,
    gamma0: f64,
) -> Result<InterfaceState> {
    let grid = StripGrid::new(PeriodicGrid1D::with_default_length(nx)?, ny)?;
    Ok(InterfaceState::new(
        grid,
        base_depth,
        vec![gamma0; nx],
        0.0,
    )?)
}

/// Drives a run mark by mark.  The stepper itself lands on recording
/// marks exactly and continuation is memoryless, so the stitched
/// trajectory is identical to a one-shot run; the gain is that a step
/// failure surrenders every snapshot recorded so far instead of nothing.
pub(crate) fn drive(
    initial: InterfaceState,
    influx: &Schedule,
    t_end: f64,
    dt: f64,
    record: usize,
) -> (Trajectory, Option<CoreError>) {
    let record = record.max(2);
    let t0 = initial.time();
    let total = t_end - t0;
    let grid = initial.grid().clone();
    let base_depth = initial.base_depth();
    let mut snapshots: Vec<Snapshot> = Vec::with_capacity(record);
    let mut state = initial;
    for m in 1..record {
        let mark = if m == record - 1 {
            t_end
        } else {
            t0 + total * m as f64 / (record - 1) as f64
        };
        match front_run(state, influx, mark, dt, 2) {
            Ok(mut segment) => {
                let last = segment.snapshots.last().unwrap();
                let next_state = InterfaceState::new(
                    grid.clone(),
                    base_depth,
                    last.gamma.clone(),
                    last.time,
                )
                .expect("a recorded snapshot is always a valid state");
                if snapshots.is_empty() {
                    snapshots.append(&mut segment.snapshots);
                } else {
                    snapshots.push(segment.snapshots.pop().unwrap());
                }
                state = next_state;
            }
            Err(e) => {
                return (
                    Trajectory {
                        grid,
                        base_depth,
                        snapshots,
                    },
                    Some(e),
                );
            }
        }
    }
    (
        Trajectory {
            grid,
            base_depth,
            snapshots,
        },
        None,
    )
}

/// Writes a trajectory as `(time, x, gamma, speed)` rows.
pub(crate) fn write_trajectory_csv(
    dir: &OutputDir,
    rel: &str,
    traj: &Trajectory,
) -> Result<()> {
    let mut table = CsvTable::new(&["time", "x", "gamma", "speed"]);
    for snap in &traj.snapshots {
        for i in 0..traj.grid.nx() {
            table.push_floats(&[snap.time, traj.grid.x().node(i), snap.gamma[i], snap.speed[i]]);
        }
    }
    table.write(dir, rel)?;
    Ok(())
}

/// Runs to completion or aborts with the partial trajectory written
/// first, converting the step error into a numeric failure.
pub(crate) fn drive_or_abort(
    dir: &OutputDir,
    csv_name: &str,
    initial: InterfaceState,
    influx: &Schedule,
    t_end: f64,
    dt: f64,
    record: usize,
) -> Result<Trajectory> {
    let (traj, err) = drive(initial, influx, t_end, dt, record);
    if let Some(e) = err {
        write_trajectory_csv(dir, csv_name, &traj)?;
        return Err(LabError::Numeric(format!(
            "run aborted at t = {}: {e} (partial trajectory in {csv_name})",
            traj.snapshots.last().map(|s| s.time).unwrap_or(0.0),
        )));
    }
    Ok(traj)
}

/// Relative spread `(max - min) / mean` of a positive sample set.
pub(crate) fn relative_spread(values: &[f64]) -> f64 {
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    let mean = sum / values.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    (hi - lo) / mean
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub(crate) fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
