//! Bootstrap-ladder experiment: difference-quotient seminorms climbing
//! the exponent schedule, stable under grid refinement, plus the
//! influx-jump gradient comparison.
//!
//! Stage `ladder` runs the multi-mode flat front on the configured grid,
//! derives the decay exponent `alpha_hat` from the oscillation
//! contraction, caps it at 1/4 to form the working exponent, and
//! measures every rung seminorm of the schedule `beta_k = alpha/2 +
//! k alpha`.  The same functional — pinned to the coarse lattice in both
//! space and time — is then re-measured on a once-refined run (half the
//! lateral spacing, half the step), and each rung must agree to within
//! 10%.  Fewer than three resolved rungs aborts the experiment with an
//! assertion failure.
//!
//! Stage `gradient` runs a single-mode front through an influx jump
//! `a -> 2a` at mid-run and compares the Holder seminorm of the lateral
//! derivative over the two half-windows flanking the jump: the spatial
//! derivative must pass through the jump almost unchanged (< 10%
//! disagreement) while the time derivative must jump by at least 1.8x.

use super::{drive_or_abort, influx_of, relative_difference, wavy_state};
use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::{LabError, Result};
use heleshaw_core::analysis::{
    bootstrap_ladder, gradient_holder, max_time_rate, oscillation_decay, LadderParams,
    LadderReport, TraceSeries,
};
use heleshaw_core::front::{dt_max, InterfaceState};
use heleshaw_core::grid::{PeriodicGrid1D, StripGrid};
use heleshaw_core::schedule::Schedule;
use serde::Serialize;

#[derive(Serialize)]
struct RungSummary {
    k: usize,
    beta: f64,
    eta: f64,
    effective_radius: f64,
    coarse_seminorm: f64,
    refined_seminorm: f64,
    relative_difference: f64,
    stable: bool,
}

#[derive(Serialize)]
struct LadderSummary {
    alpha_hat: f64,
    alpha_cfg: f64,
    bound: f64,
    coarse_nx: usize,
    refined_nx: usize,
    rungs: Vec<RungSummary>,
}

#[derive(Serialize)]
struct GradientSummary {
    alpha: f64,
    exponent: f64,
    seminorm_before: f64,
    seminorm_after: f64,
    disagreement: f64,
    rate_before: f64,
    rate_after: f64,
    rate_ratio: f64,
    jump_time: f64,
    window: f64,
}

const MIN_RUNGS: usize = 3;
const STABILITY_TOL: f64 = 0.10;
const GRADIENT_TOL: f64 = 0.10;
const RATE_JUMP_MIN: f64 = 1.8;
/// Cap on the working exponent: the schedule is built from
/// `min(alpha_hat, 1/4)`.
const ALPHA_CAP: f64 = 0.25;

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let alpha_cfg = outcome.stage("ladder", |o| ladder_stage(cfg, o, dir))?;
    outcome.stage("gradient", |o| gradient_stage(cfg, o, dir, alpha_cfg))?;
    Ok(())
}

fn trace_run(
    cfg: &RunConfig,
    dir: &OutputDir,
    nx: usize,
    record: usize,
    csv_name: &str,
) -> Result<TraceSeries> {
    let influx = influx_of(cfg)?;
    let state = wavy_state(
        nx,
        cfg.grid.ny,
        cfg.domain.base_depth,
        cfg.domain.gamma0,
        cfg.domain.eps,
    )?;
    let bound = dt_max(state.grid(), influx.max_value());
    let dt = cfg.time.dt.min(0.9 * bound);
    let traj = drive_or_abort(dir, csv_name, state, &influx, cfg.time.t_end, dt, record)?;
    Ok(TraceSeries::from_trajectory(&traj, &influx, cfg.domain.eps)?)
}

fn ladder_stage(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<f64> {
    let coarse_nx = cfg.grid.nx;
    let refined_nx = cfg.ladder.refine_nx;
    let record = cfg.time.record;

    // Coarse run and its decay exponent.
    let coarse = trace_run(cfg, dir, coarse_nx, record, "ladder_coarse.csv")?;
    let decay = oscillation_decay(
        &coarse,
        cfg.harnack.center,
        cfg.harnack.base_radius.min(cfg.time.t_end),
        cfg.harnack.levels,
        cfg.harnack.mu_bar,
        cfg.harnack.truncation,
    )?;
    let alpha_hat = decay.alpha_hat;
    let alpha_cfg = alpha_hat.min(ALPHA_CAP);
    if !(alpha_cfg > 0.0) {
        return Err(LabError::Assertion(format!(
            "decay exponent alpha_hat = {alpha_hat} yields no usable ladder exponent"
        )));
    }

    let coarse_h = coarse.grid().h();
    let coarse_dt = cfg.time.t_end / (record - 1) as f64;
    let params = LadderParams {
        alpha: alpha_cfg,
        bound: cfg.ladder.bound,
        truncation: cfg.ladder.truncation,
        min_cells: cfg.ladder.min_cells,
        center: cfg.harnack.center,
        coarse_h,
        coarse_dt,
    };
    let coarse_report: LadderReport = bootstrap_ladder(&coarse, &params)?;

    // Refined run: half the lateral spacing, half the step, same
    // snapshot marks at the coarse cadence plus midpoints.  The seminorm
    // functional stays pinned to the coarse lattice.
    let refined_record = 2 * (record - 1) + 1;
    let refined_cfg = {
        let mut c = cfg.clone();
        c.time.dt = 0.5 * cfg.time.dt;
        c
    };
    let refined = trace_run(
        &refined_cfg,
        dir,
        refined_nx,
        refined_record,
        "ladder_refined.csv",
    )?;
    let refined_report = bootstrap_ladder(&refined, &params)?;

    let mut table = CsvTable::new(&[
        "k",
        "beta",
        "eta",
        "radius",
        "coarse_seminorm",
        "refined_seminorm",
        "relative_difference",
    ]);
    let mut rungs = Vec::new();
    let pairs = coarse_report.rungs.len().min(refined_report.rungs.len());
    let mut all_stable = true;
    for m in 0..pairs {
        let rc = &coarse_report.rungs[m];
        let rr = &refined_report.rungs[m];
        let rel = relative_difference(rc.seminorm, rr.seminorm);
        let stable = rel < STABILITY_TOL;
        all_stable &= stable;
        table.push_floats(&[
            rc.k as f64,
            rc.beta,
            rc.eta,
            rc.effective_radius,
            rc.seminorm,
            rr.seminorm,
            rel,
        ]);
        rungs.push(RungSummary {
            k: rc.k,
            beta: rc.beta,
            eta: rc.eta,
            effective_radius: rc.effective_radius,
            coarse_seminorm: rc.seminorm,
            refined_seminorm: rr.seminorm,
            relative_difference: rel,
            stable,
        });
    }
    table.write(dir, "ladder.csv")?;
    io::write_json(
        dir,
        "ladder.json",
        &LadderSummary {
            alpha_hat,
            alpha_cfg,
            bound: cfg.ladder.bound,
            coarse_nx,
            refined_nx,
            rungs,
        },
    )?;

    if coarse_report.under_resolved || pairs < MIN_RUNGS {
        return Err(LabError::Assertion(format!(
            "insufficient rungs: {pairs} resolved, {MIN_RUNGS} required",
        )));
    }

    outcome.check(
        "rungs",
        true,
        format!(
            "{pairs} rungs of the beta = alpha/2 + k alpha schedule at alpha = {alpha_cfg:.4} (alpha_hat = {alpha_hat:.4})"
        ),
    );
    outcome.check(
        "stable",
        all_stable,
        format!(
            "every rung seminorm moved < {:.0}% under refinement {}x -> {}x",
            STABILITY_TOL * 100.0,
            coarse_nx,
            refined_nx
        ),
    );
    let bounded = coarse_report.rungs.iter().all(|r| r.pass);
    outcome.check(
        "bounded",
        bounded,
        format!("all rung seminorms within the configured bound {}", cfg.ladder.bound),
    );
    Ok(alpha_cfg)
}

fn gradient_stage(
    cfg: &RunConfig,
    outcome: &mut Outcome,
    dir: &OutputDir,
    alpha_cfg: f64,
) -> Result<()> {
    let nx = cfg.ladder.refine_nx;
    let t_end = cfg.time.t_end;
    let jump_t = 0.5 * t_end;
    let window = cfg.ladder.window;
    let base = influx_of(cfg)?.value_at(0.0);
    let jumping = Schedule::new(&[(0.0, base), (jump_t, 2.0 * base)])?;

    // Snapshot cadence fine enough to put ~12 rows in each half-window.
    let spacing = window / 12.0;
    let record = ((t_end / spacing).round() as usize).max(cfg.time.record - 1) + 1;

    let grid = StripGrid::new(PeriodicGrid1D::with_default_length(nx)?, cfg.grid.ny)?;
    let eps = cfg.domain.eps;
    let gamma: Vec<f64> = (0..nx)
        .map(|i| cfg.domain.gamma0 + eps * grid.x().node(i).cos())
        .collect();
    let state = InterfaceState::new(grid, cfg.domain.base_depth, gamma, 0.0)?;
    let bound = dt_max(state.grid(), jumping.max_value());
    let dt = cfg.time.dt.min(0.45 * bound);
    let traj = drive_or_abort(dir, "gradient_trace.csv", state, &jumping, t_end, dt, record)?;
    let series = TraceSeries::from_trajectory(&traj, &jumping, eps)?;

    // Row indices flanking the jump.
    let times = series.times();
    let find = |t: f64| -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (j, &tj) in times.iter().enumerate() {
            let d = (tj - t).abs();
            if d < dist {
                dist = d;
                best = j;
            }
        }
        best
    };
    let j_jump = find(jump_t);
    let j_lo = find(jump_t - window);
    let j_hi = find(jump_t + window);
    if j_lo >= j_jump || j_jump >= j_hi {
        return Err(LabError::Assertion(format!(
            "gradient windows need rows on both sides of the jump (got {j_lo}, {j_jump}, {j_hi})"
        )));
    }
    let before = series.window(j_lo, j_jump)?;
    let after = series.window(j_jump, j_hi)?;

    let exponent = alpha_cfg / 2.0;
    let rep_before = gradient_holder(&before, alpha_cfg, cfg.harnack.center, window, 0.0)?;
    let rep_after = gradient_holder(&after, alpha_cfg, cfg.harnack.center, window, 0.0)?;
    let rate_before = max_time_rate(&before);
    let rate_after = max_time_rate(&after);
    let rate_ratio = rate_after / rate_before;
    let disagreement = relative_difference(rep_before.seminorm, rep_after.seminorm);

    io::write_json(
        dir,
        "gradient.json",
        &GradientSummary {
            alpha: alpha_cfg,
            exponent,
            seminorm_before: rep_before.seminorm,
            seminorm_after: rep_after.seminorm,
            disagreement,
            rate_before,
            rate_after,
            rate_ratio,
            jump_time: jump_t,
            window,
        },
    )?;

    if rep_before.unresolved || rep_after.unresolved {
        outcome.warn(format!(
            "derivative quotients disagree at the finest steps ({:.3} / {:.3})",
            rep_before.disagreement, rep_after.disagreement
        ));
    }
    outcome.check(
        "gradient-stable",
        disagreement < GRADIENT_TOL,
        format!(
            "lateral derivative seminorm {:.4} before vs {:.4} after the jump ({:.1}% apart)",
            rep_before.seminorm,
            rep_after.seminorm,
            disagreement * 100.0
        ),
    );
    outcome.check(
        "rate-jump",
        rate_ratio >= RATE_JUMP_MIN,
        format!(
            "time rate {rate_before:.4} -> {rate_after:.4} across the influx jump (ratio {rate_ratio:.3}, need {RATE_JUMP_MIN})"
        ),
    );
    Ok(())
}
