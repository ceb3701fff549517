//! Front simulation experiment: planar tracking plus the dispersion
//! survey.
//!
//! Stage `planar` runs the flat interface under a constant unit influx
//! and under the configured schedule, checking that the front tracks the
//! accumulated influx to within 1e-8 — the planar solution is exact for
//! the scheme, so the only residue is solver tolerance.  Stage
//! `dispersion` perturbs the flat interface by one lateral mode at a
//! time and fits the exponential decay rate against the finite-depth
//! prediction `-a k tanh(k L)`, with the deep-mode limit `-a k` checked
//! once `k L` is large.

use super::{drive_or_abort, influx_of, planar_state, write_trajectory_csv};
use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::front::{dt_max, fit_mode_decay, flatness_check, DispersionFit};
use heleshaw_core::grid::{PeriodicGrid1D, StripGrid};
use heleshaw_core::front::InterfaceState;
use heleshaw_core::schedule::Schedule;
use serde::Serialize;

#[derive(Serialize)]
struct PlanarSummary {
    constant_worst: f64,
    variable_worst: f64,
    tolerance: f64,
    duration: f64,
    nx: usize,
    ny: usize,
}

#[derive(Serialize)]
struct ModeSummary {
    mode: usize,
    wavenumber: f64,
    measured_rate: f64,
    predicted_rate: f64,
    relative_error: f64,
    fit_residual: f64,
    depth_product: f64,
    deep_error: Option<f64>,
}

#[derive(Serialize)]
struct DispersionSummary {
    influx_mean: f64,
    tolerance_shallow: f64,
    tolerance_deep: f64,
    modes: Vec<ModeSummary>,
}

const PLANAR_TOL: f64 = 1e-8;
const SHALLOW_TOL: f64 = 0.02;
const DEEP_TOL: f64 = 0.01;
/// `k L` beyond which the finite-depth rate is checked against the
/// deep-layer limit `-a k`.
const DEEP_PRODUCT: f64 = 6.0;

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    outcome.stage("planar", |o| planar_stage(cfg, o, dir))?;
    outcome.stage("dispersion", |o| dispersion_stage(cfg, o, dir))?;
    Ok(())
}

fn planar_stage(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let s = &cfg.simulate;
    let t_end = s.planar_t;
    let record = 11usize;

    // Constant unit influx.
    let constant = Schedule::constant(1.0)?;
    let state = planar_state(s.planar_nx, s.planar_ny, cfg.domain.base_depth, cfg.domain.gamma0)?;
    let dt = 0.5 * dt_max(state.grid(), 1.0);
    let traj = drive_or_abort(dir, "trajectory.csv", state, &constant, t_end, dt, record)?;
    write_trajectory_csv(dir, "trajectory.csv", &traj)?;
    if cfg.run.binary_fields {
        let last = traj.snapshots.last().unwrap();
        io::write_field(
            dir,
            "planar_field.bin",
            traj.grid.ny() as u32 + 1,
            traj.grid.nx() as u32,
            &last.field,
        )?;
    }
    let constant_report = flatness_check(&traj, &constant, cfg.domain.gamma0, PLANAR_TOL)?;

    // Heights must never decrease along the run (monotone expansion).
    let mut monotone = true;
    for pair in traj.snapshots.windows(2) {
        for i in 0..traj.grid.nx() {
            if pair[1].gamma[i] < pair[0].gamma[i] - 1e-12 {
                monotone = false;
            }
        }
    }

    // The configured (possibly jumping) schedule.
    let variable = influx_of(cfg)?;
    let state = planar_state(s.planar_nx, s.planar_ny, cfg.domain.base_depth, cfg.domain.gamma0)?;
    let dt_v = 0.5 * dt_max(state.grid(), variable.max_value());
    let traj_v = drive_or_abort(
        dir,
        "trajectory_variable.csv",
        state,
        &variable,
        t_end,
        dt_v,
        record,
    )?;
    write_trajectory_csv(dir, "trajectory_variable.csv", &traj_v)?;
    let variable_report = flatness_check(&traj_v, &variable, cfg.domain.gamma0, PLANAR_TOL)?;

    io::write_json(
        dir,
        "planar.json",
        &PlanarSummary {
            constant_worst: constant_report.worst_deviation,
            variable_worst: variable_report.worst_deviation,
            tolerance: PLANAR_TOL,
            duration: t_end,
            nx: s.planar_nx,
            ny: s.planar_ny,
        },
    )?;

    outcome.check(
        "planar-constant",
        constant_report.ok,
        format!(
            "sup |gamma - (gamma0 + t)| = {:.3e} over T = {t_end} (tol {PLANAR_TOL:.0e})",
            constant_report.worst_deviation
        ),
    );
    outcome.check(
        "planar-variable",
        variable_report.ok,
        format!(
            "sup |gamma - (gamma0 + A(t))| = {:.3e} under the configured schedule (tol {PLANAR_TOL:.0e})",
            variable_report.worst_deviation
        ),
    );
    outcome.check(
        "planar-monotone",
        monotone,
        "interface heights never decrease between snapshots".into(),
    );
    Ok(())
}

fn dispersion_stage(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let influx = influx_of(cfg)?;
    let nx = cfg.grid.nx;
    let ny = cfg.grid.ny;
    let t_end = cfg.time.t_end;
    let delta = cfg.simulate.delta;
    let floor = delta * 1e-3;

    let mut table = CsvTable::new(&[
        "mode",
        "measured_rate",
        "predicted_rate",
        "relative_error",
        "fit_residual",
        "depth_product",
        "deep_error",
    ]);
    let mut summaries = Vec::new();
    let mut amplitudes = CsvTable::new(&["mode", "time", "amplitude"]);
    let a_mean = influx.integral(0.0, t_end) / t_end;

    for &mode in &cfg.simulate.modes {
        let grid = StripGrid::new(PeriodicGrid1D::with_default_length(nx)?, ny)?;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| {
                cfg.domain.gamma0 + delta * (mode as f64 * grid.x().node(i)).cos()
            })
            .collect();
        let state = InterfaceState::new(grid, cfg.domain.base_depth, gamma, 0.0)?;
        let bound = dt_max(state.grid(), influx.max_value());
        let dt = cfg.time.dt.min(0.9 * bound);
        let csv_name = format!("dispersion_mode{mode}.csv");
        let traj = drive_or_abort(dir, &csv_name, state, &influx, t_end, dt, cfg.time.record)?;

        let fit: DispersionFit = fit_mode_decay(&traj, mode, floor)?;
        for &(t, amp) in &fit.samples {
            amplitudes.push_floats(&[mode as f64, t, amp]);
        }
        let k = traj.grid.x().wavenumber(mode).abs();
        // Layer depth midway through the run, for the deep-mode cutoff.
        let mid_layer = cfg.domain.base_depth
            + cfg.domain.gamma0
            + influx.integral(0.0, 0.5 * t_end);
        let depth_product = k * mid_layer;
        let deep_error = if depth_product >= DEEP_PRODUCT {
            Some((fit.measured_rate + a_mean * k).abs() / (a_mean * k))
        } else {
            None
        };

        table.push(vec![
            io::fmt_f64(mode as f64),
            io::fmt_f64(fit.measured_rate),
            io::fmt_f64(fit.predicted_rate),
            io::fmt_f64(fit.relative_error),
            io::fmt_f64(fit.fit_residual),
            io::fmt_f64(depth_product),
            deep_error.map(io::fmt_f64).unwrap_or_default(),
        ]);

        outcome.check(
            &format!("dispersion-mode-{mode}"),
            fit.relative_error <= SHALLOW_TOL,
            format!(
                "measured {:.6} vs predicted {:.6} (rel {:.4}, tol {SHALLOW_TOL})",
                fit.measured_rate, fit.predicted_rate, fit.relative_error
            ),
        );
        if let Some(de) = deep_error {
            outcome.check(
                &format!("dispersion-deep-{mode}"),
                de <= DEEP_TOL,
                format!(
                    "kL = {depth_product:.1}: measured {:.6} vs deep limit {:.6} (rel {de:.4}, tol {DEEP_TOL})",
                    fit.measured_rate,
                    -a_mean * k
                ),
            );
        }
        summaries.push(ModeSummary {
            mode,
            wavenumber: k,
            measured_rate: fit.measured_rate,
            predicted_rate: fit.predicted_rate,
            relative_error: fit.relative_error,
            fit_residual: fit.fit_residual,
            depth_product,
            deep_error,
        });
    }

    table.write(dir, "dispersion.csv")?;
    amplitudes.write(dir, "amplitudes.csv")?;
    io::write_json(
        dir,
        "dispersion.json",
        &DispersionSummary {
            influx_mean: a_mean,
            tolerance_shallow: SHALLOW_TOL,
            tolerance_deep: DEEP_TOL,
            modes: summaries,
        },
    )?;
    Ok(())
}
