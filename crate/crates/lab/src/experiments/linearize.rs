//! Linearization-gap sweep: how fast the nonlinear front collapses onto
//! the layer-depth linear flow as the interface flattens.
//!
//! For each flatness value `eps` in the sweep, the front starts from the
//! fixed multi-mode profile scaled by `eps`, runs under the configured
//! influx, and the normalized trace is compared against the linear
//! evolution of its own first row.  The sup-norm gap must shrink
//! linearly in `eps`: the log-log regression slope of gap against `eps`
//! is required to sit in `[0.8, 1.2]`.

use super::{drive_or_abort, influx_of, wavy_state};
use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::analysis::{fit_loglog_slope, linearization_gap, TraceSeries};
use heleshaw_core::front::dt_max;
use serde::Serialize;

#[derive(Serialize)]
struct SweepPoint {
    eps: f64,
    gap: f64,
    gap_over_eps: f64,
}

#[derive(Serialize)]
struct Regression {
    slope: f64,
    lo: f64,
    hi: f64,
    points: Vec<SweepPoint>,
}

const SLOPE_LO: f64 = 0.8;
const SLOPE_HI: f64 = 1.2;

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let influx = influx_of(cfg)?;
    let depth0 = cfg.domain.base_depth + cfg.domain.gamma0;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut table = CsvTable::new(&["eps", "gap", "gap_over_eps"]);
    let mut points = Vec::new();

    outcome.stage("sweep", |o| {
        for &eps in &cfg.linearize.sweep {
            let state = wavy_state(
                cfg.grid.nx,
                cfg.grid.ny,
                cfg.domain.base_depth,
                cfg.domain.gamma0,
                eps,
            )?;
            let bound = dt_max(state.grid(), influx.max_value());
            let dt = cfg.time.dt.min(0.9 * bound);
            let csv_name = format!("trace_eps{eps}.csv");
            let traj = drive_or_abort(
                dir,
                &csv_name,
                state,
                &influx,
                cfg.time.t_end,
                dt,
                cfg.time.record,
            )?;
            let series = TraceSeries::from_trajectory(&traj, &influx, eps)?;
            let report = linearization_gap(&series, depth0, &influx)?;
            table.push_floats(&[eps, report.gap, report.gap / eps]);
            points.push(SweepPoint {
                eps,
                gap: report.gap,
                gap_over_eps: report.gap / eps,
            });
            o.check(
                &format!("gap-eps-{eps}"),
                report.gap.is_finite() && report.gap > 0.0,
                format!("sup gap {:.3e} against the linear flow", report.gap),
            );
            samples.push((eps, report.gap));
        }
        Ok(())
    })?;

    let slope = fit_loglog_slope(&samples)?;
    table.write(dir, "sweep.csv")?;
    io::write_json(
        dir,
        "regression.json",
        &Regression {
            slope,
            lo: SLOPE_LO,
            hi: SLOPE_HI,
            points,
        },
    )?;
    outcome.check(
        "slope",
        (SLOPE_LO..=SLOPE_HI).contains(&slope),
        format!("log-log gap slope {slope:.3} within [{SLOPE_LO}, {SLOPE_HI}]"),
    );
    Ok(())
}
