//! Oscillation-decay experiment: the quantitative Harnack mechanism.
//!
//! A multi-mode flat run is traced, and the oscillation of the
//! normalized trace is measured over nested parabolic cylinders shrinking
//! dyadically about the configured center at the final time.  Each level
//! must contract by a definite factor; the worst contraction yields the
//! decay rate `theta_hat` and the exponent
//! `alpha_hat = ln(1 - theta_hat) / ln(mu_bar)`.

use super::{drive_or_abort, influx_of, wavy_state};
use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::analysis::{ellipticity_bounds, oscillation_decay, TraceSeries};
use heleshaw_core::front::dt_max;
use serde::Serialize;

#[derive(Serialize)]
struct DecaySummary {
    theta_hat: f64,
    alpha_hat: f64,
    mu_bar: f64,
    contractions: Vec<f64>,
    radii: Vec<f64>,
    oscillations: Vec<f64>,
    sample_counts: Vec<usize>,
    speed_min: f64,
    speed_max: f64,
}

/// Decay rate every level must clear.
const THETA_MIN: f64 = 0.05;
/// Minimum number of nested contractions the run must resolve.
const MIN_LEVELS: usize = 3;

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let influx = influx_of(cfg)?;
    let eps = cfg.domain.eps;

    let traj = outcome.stage("simulate", |_| {
        let state = wavy_state(
            cfg.grid.nx,
            cfg.grid.ny,
            cfg.domain.base_depth,
            cfg.domain.gamma0,
            eps,
        )?;
        let bound = dt_max(state.grid(), influx.max_value());
        let dt = cfg.time.dt.min(0.9 * bound);
        drive_or_abort(
            dir,
            "trace.csv",
            state,
            &influx,
            cfg.time.t_end,
            dt,
            cfg.time.record,
        )
    })?;

    super::write_trajectory_csv(dir, "trace.csv", &traj)?;

    outcome.stage("decay", |o| {
        let series = TraceSeries::from_trajectory(&traj, &influx, eps)?;
        let h = &cfg.harnack;
        let report = oscillation_decay(
            &series,
            h.center,
            h.base_radius,
            h.levels,
            h.mu_bar,
            h.truncation,
        )?;
        let (speed_min, speed_max) = ellipticity_bounds(&traj);

        let mut table = CsvTable::new(&["level", "radius", "oscillation", "samples", "contraction"]);
        for m in 0..report.radii.len() {
            table.push(vec![
                io::fmt_f64(m as f64),
                io::fmt_f64(report.radii[m]),
                io::fmt_f64(report.oscillations[m]),
                io::fmt_f64(report.sample_counts[m] as f64),
                if m == 0 {
                    String::new()
                } else {
                    io::fmt_f64(report.contractions[m - 1])
                },
            ]);
        }
        table.write(dir, "decay.csv")?;
        io::write_json(
            dir,
            "decay.json",
            &DecaySummary {
                theta_hat: report.theta_hat,
                alpha_hat: report.alpha_hat,
                mu_bar: report.mu_bar,
                contractions: report.contractions.clone(),
                radii: report.radii.clone(),
                oscillations: report.oscillations.clone(),
                sample_counts: report.sample_counts.clone(),
                speed_min,
                speed_max,
            },
        )?;

        o.check(
            "levels",
            !report.degenerate && report.contractions.len() >= MIN_LEVELS,
            format!(
                "{} nested contractions resolved (need {MIN_LEVELS})",
                report.contractions.len()
            ),
        );
        let worst = report
            .contractions
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        o.check(
            "contraction",
            report.theta_hat >= THETA_MIN,
            format!(
                "every level contracts by <= {:.4} so theta_hat = {:.4} >= {THETA_MIN}",
                worst, report.theta_hat
            ),
        );
        o.check(
            "exponent",
            report.alpha_hat > 0.0,
            format!("alpha_hat = {:.4} > 0", report.alpha_hat),
        );
        if speed_min < cfg.influx.lambda || speed_max > cfg.influx.big_lambda {
            o.warn(format!(
                "interface speeds [{speed_min:.4}, {speed_max:.4}] leave the configured ellipticity band [{}, {}]",
                cfg.influx.lambda, cfg.influx.big_lambda
            ));
        }
        Ok(())
    })
}
