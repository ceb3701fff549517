//! Sup/inf-convolution battery: the structural properties of the
//! regularized traces, exhaustively verified on randomized flat fields.
//!
//! Each trial draws a smooth decaying two-mode trace, sup-convolves it,
//! and checks band preservation, dual-window containment, the touching
//! paraboloid minorization, the `2N/sqrt(xi)` Lipschitz bound, the
//! two-sided sandwich, and lattice-exact semiconvexity.  A separate
//! stage sweeps the temporal penalty scale downward on a time-Lipschitz
//! trace and verifies pointwise monotone decrease toward the pure
//! spatial convolution, with the gap controlled by `L^2 tau / 8N` plus
//! lattice slack.

use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::analysis::TraceSeries;
use heleshaw_core::convolution::{check_regularization, tau_monotonicity, ConvolutionParams};
use heleshaw_core::grid::PeriodicGrid1D;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
struct BatterySummary {
    trials: usize,
    failures: usize,
    worst_lipschitz_margin: f64,
    xi: f64,
    tau: f64,
    flatness: f64,
}

#[derive(Serialize)]
struct TauSummary {
    taus: Vec<f64>,
    gaps_to_spatial: Vec<f64>,
    gap_bounds: Vec<f64>,
    worst_increase: f64,
    time_lipschitz: f64,
}

fn series_from<F: Fn(f64, f64) -> f64>(
    nx: usize,
    nt: usize,
    dt: f64,
    eps: f64,
    f: F,
) -> Result<TraceSeries> {
    let grid = PeriodicGrid1D::with_default_length(nx)?;
    let times: Vec<f64> = (0..nt).map(|j| j as f64 * dt).collect();
    let mut values = Vec::with_capacity(nx * nt);
    for t in &times {
        for i in 0..nx {
            values.push(f(grid.node(i), *t));
        }
    }
    Ok(TraceSeries::new(grid, times, values, eps)?)
}

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let params = ConvolutionParams::new(
        cfg.supconv.xi,
        cfg.supconv.tau,
        cfg.supconv.flatness,
        cfg.domain.eps,
    )?;

    outcome.stage("battery", |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        let mut table = CsvTable::new(&[
            "trial",
            "ok",
            "lipschitz_measured",
            "lipschitz_bound",
            "band_out_lo",
            "band_out_hi",
        ]);
        let mut failures = 0usize;
        let mut worst_margin = f64::INFINITY;
        for trial in 0..cfg.supconv.trials {
            let a1: f64 = rng.gen_range(-0.4..0.4);
            let a2: f64 = rng.gen_range(-0.25..0.25);
            let phase: f64 = rng.gen_range(0.0..6.28);
            let sigma: f64 = rng.gen_range(-1.0..0.0);
            let series = series_from(64, 16, 0.05, cfg.domain.eps, move |x, t| {
                (sigma * t).exp() * (a1 * (x + phase).sin() + a2 * (2.0 * x).cos())
            })?;
            let (report, _) = check_regularization(&series, &params, None)?;
            if !report.ok {
                failures += 1;
            }
            worst_margin = worst_margin.min(report.lipschitz_bound - report.lipschitz_measured);
            table.push(vec![
                io::fmt_f64(trial as f64),
                (if report.ok { "1" } else { "0" }).to_string(),
                io::fmt_f64(report.lipschitz_measured),
                io::fmt_f64(report.lipschitz_bound),
                io::fmt_f64(report.band_out.0),
                io::fmt_f64(report.band_out.1),
            ]);
        }
        table.write(dir, "battery.csv")?;
        io::write_json(
            dir,
            "battery.json",
            &BatterySummary {
                trials: cfg.supconv.trials,
                failures,
                worst_lipschitz_margin: worst_margin,
                xi: cfg.supconv.xi,
                tau: cfg.supconv.tau,
                flatness: cfg.supconv.flatness,
            },
        )?;
        o.check(
            "battery",
            failures == 0,
            format!(
                "{} of {} randomized traces pass every structural item",
                cfg.supconv.trials - failures,
                cfg.supconv.trials
            ),
        );
        Ok(())
    })?;

    outcome.stage("tau-sweep", |o| {
        // Fixed time-Lipschitz trace, steep enough (and the time lattice
        // fine enough) that the optimal temporal offset `L tau / 4N` is
        // resolved at the larger scales: the measured gap then decays
        // visibly toward zero as tau shrinks instead of sitting at zero
        // throughout.
        let rate = 1.6f64;
        let dt = 0.0025f64;
        let series = series_from(64, 240, dt, cfg.domain.eps, move |x, t| {
            0.5 * x.sin() + rate * t
        })?;
        let taus = [cfg.supconv.tau, cfg.supconv.tau / 4.0, cfg.supconv.tau / 16.0];
        let report = tau_monotonicity(&series, &params, None, &taus)?;
        let n = cfg.supconv.flatness;
        let bounds: Vec<f64> = taus
            .iter()
            .map(|tau| rate * rate * tau / (8.0 * n) + 2.0 * rate * dt)
            .collect();

        let mut table = CsvTable::new(&["tau", "gap_to_spatial", "gap_bound"]);
        for (m, tau) in report.taus.iter().enumerate() {
            table.push_floats(&[*tau, report.gaps_to_spatial[m], bounds[m]]);
        }
        table.write(dir, "tau_sweep.csv")?;
        io::write_json(
            dir,
            "tau.json",
            &TauSummary {
                taus: report.taus.clone(),
                gaps_to_spatial: report.gaps_to_spatial.clone(),
                gap_bounds: bounds.clone(),
                worst_increase: report.worst_increase,
                time_lipschitz: rate,
            },
        )?;

        o.check(
            "tau-monotone",
            report.monotone_ok,
            format!(
                "sup-convolution decreases pointwise as tau shrinks (worst increase {:.3e})",
                report.worst_increase
            ),
        );
        let gaps_ok = report
            .gaps_to_spatial
            .iter()
            .zip(&bounds)
            .all(|(g, b)| g <= &(b + 1e-12));
        o.check(
            "tau-gap",
            gaps_ok,
            format!(
                "gaps to the spatial convolution {:?} within L^2 tau/8N + lattice slack",
                report.gaps_to_spatial
            ),
        );
        Ok(())
    })
}
