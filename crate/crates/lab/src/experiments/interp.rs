//! Lattice interpolation laboratory: randomized exhaustive sweeps of the
//! three one-dimensional verifiers.
//!
//! Stage `max-principle` throws seeded random samples — smooth, tilted,
//! interval-valued, spiked — at the second-difference maximum principle
//! and demands the implication survive every single trial (a violated
//! conclusion must always come with a violated hypothesis and a concrete
//! witness).  Stage `interpolation` measures the first-quotient /
//! second-quotient ratio on a seeded family at two lattice resolutions
//! and demands the ratio respect its bound and move little under
//! refinement.  Stage `derivative` runs the derivative Holder estimate on
//! the normalized extremal power sample at the configured exponents and
//! pins the bound formula against a reference value.

use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::interp::{
    derivative_bound, verify_derivative_holder, verify_max_principle,
    verify_quotient_interpolation,
};
use heleshaw_core::mval::Mval;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Reference value of the conclusion bound at exponents (0.8, 0.7):
/// `4 / (sqrt(2) - 1)`.
const FORMULA_REFERENCE: f64 = 9.65685424949238;
const RATIO_DRIFT_TOL: f64 = 0.2;
const RATIO_FLOOR: f64 = 0.05;

#[derive(Serialize)]
struct MaxPrincipleSummary {
    trials: usize,
    implication_violations: usize,
    conclusion_breaks: usize,
    grid_n: usize,
    h0: f64,
}

#[derive(Serialize)]
struct InterpolationSummary {
    trials: usize,
    alpha: f64,
    beta: f64,
    bound: f64,
    worst_ratio: f64,
    worst_drift: f64,
}

#[derive(Serialize)]
struct DerivativeSummary {
    alpha: f64,
    beta: f64,
    hypothesis_value: f64,
    derivative_seminorm: f64,
    bound: f64,
    formula_at_reference: f64,
}

#[derive(Serialize)]
struct InterpSummary {
    max_principle: MaxPrincipleSummary,
    interpolation: InterpolationSummary,
    derivative: DerivativeSummary,
}

fn lattice(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let p = &cfg.interp;

    let max_principle = outcome.stage("max-principle", |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        let n = p.grid_n;
        let xs = lattice(n);
        let mut table = CsvTable::new(&[
            "trial",
            "boundary_ok",
            "curvature_ok",
            "conclusion_ok",
            "implication_ok",
        ]);
        let mut violations = 0usize;
        let mut conclusion_breaks = 0usize;
        for trial in 0..p.trials {
            let amp: f64 = rng.gen_range(0.2..3.0);
            let k = rng.gen_range(1..5) as f64;
            let phase: f64 = rng.gen_range(0.0..6.28);
            let tilt: f64 = rng.gen_range(-1.0..1.0);
            let mut v: Vec<Mval> = xs
                .iter()
                .map(|&x| {
                    let base = amp * (k * x + phase).sin() + tilt * x;
                    if rng.gen_bool(0.2) {
                        let w: f64 = rng.gen_range(0.0..0.3);
                        Mval::interval(base - w, base + w).expect("nonempty interval")
                    } else {
                        Mval::singleton(base)
                    }
                })
                .collect();
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(1..n - 1);
                let boost: f64 = rng.gen_range(0.5..2.0);
                v[at] = v[at].clone().add(Mval::singleton(boost));
            }
            let report = verify_max_principle(&v, p.h0)?;
            if !report.implication_ok {
                violations += 1;
            }
            if !report.conclusion_ok {
                conclusion_breaks += 1;
                // Contrapositive bookkeeping: a broken conclusion must be
                // witnessed by a broken hypothesis.
                if report.boundary_ok && report.curvature_witness.is_none() {
                    violations += 1;
                }
            }
            table.push(vec![
                trial.to_string(),
                (report.boundary_ok as u8).to_string(),
                (report.curvature_ok as u8).to_string(),
                (report.conclusion_ok as u8).to_string(),
                (report.implication_ok as u8).to_string(),
            ]);
        }
        table.write(dir, "max_principle.csv")?;
        o.check(
            "max-principle",
            violations == 0,
            format!(
                "{} trials, {violations} implication violations ({conclusion_breaks} conclusion breaks, all witnessed)",
                p.trials
            ),
        );
        Ok(MaxPrincipleSummary {
            trials: p.trials,
            implication_violations: violations,
            conclusion_breaks,
            grid_n: n,
            h0: p.h0,
        })
    })?;

    let interpolation = outcome.stage("interpolation", |o| {
        // Exponents for the quotient interpolation must sum under one;
        // the canonical pair (0.2, 0.3) is used independently of the
        // derivative-stage exponents.
        let (alpha, beta) = (0.2, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut table = CsvTable::new(&["trial", "coarse_ratio", "fine_ratio", "drift"]);
        let mut all_ok = true;
        let mut worst_ratio = 0.0f64;
        let mut worst_drift = 0.0f64;
        let mut bound = 0.0f64;
        for trial in 0..p.trials {
            let a1: f64 = rng.gen_range(-1.0..1.0);
            let a2: f64 = rng.gen_range(-1.0..1.0);
            let a3: f64 = rng.gen_range(-0.5..0.5);
            let k: f64 = rng.gen_range(1.0..4.0);
            let f = |x: f64| a1 * x + a2 * (k * x).sin() + a3 * (2.0 * k * x).cos();
            let coarse: Vec<Mval> = lattice(33).into_iter().map(|x| Mval::singleton(f(x))).collect();
            let fine: Vec<Mval> = lattice(65).into_iter().map(|x| Mval::singleton(f(x))).collect();
            let rc = verify_quotient_interpolation(&coarse, alpha, beta, 0.0, None)?;
            let rf = verify_quotient_interpolation(&fine, alpha, beta, 0.0, None)?;
            bound = rc.bound;
            let drift = (rc.ratio - rf.ratio).abs();
            let scale = rc.ratio.max(rf.ratio).max(RATIO_FLOOR);
            if !(rc.ok && rf.ok && drift <= RATIO_DRIFT_TOL * scale) {
                all_ok = false;
            }
            worst_ratio = worst_ratio.max(rc.ratio).max(rf.ratio);
            worst_drift = worst_drift.max(drift / scale);
            table.push(vec![
                trial.to_string(),
                io::fmt_f64(rc.ratio),
                io::fmt_f64(rf.ratio),
                io::fmt_f64(drift),
            ]);
        }
        table.write(dir, "interpolation.csv")?;
        o.check(
            "interpolation",
            all_ok,
            format!(
                "{} trials: worst ratio {worst_ratio:.4} <= bound {bound:.4}, worst relative drift {worst_drift:.4} <= {RATIO_DRIFT_TOL}",
                p.trials
            ),
        );
        Ok(InterpolationSummary {
            trials: p.trials,
            alpha,
            beta,
            bound,
            worst_ratio,
            worst_drift,
        })
    })?;

    let derivative = outcome.stage("derivative", |o| {
        // Extremal power sample |x|^(alpha+beta), normalized so the
        // hypothesis quantity sits just inside 1.
        let s = p.alpha + p.beta;
        let n = 257usize;
        let raw: Vec<f64> = lattice(n).into_iter().map(|x| x.abs().powf(s)).collect();
        let probe = verify_derivative_holder(&raw, p.alpha, p.beta, 0.0)?;
        let norm = probe.hypothesis_value * 1.000001;
        let v: Vec<f64> = raw.iter().map(|y| y / norm).collect();
        let report = verify_derivative_holder(&v, p.alpha, p.beta, 0.0)?;
        o.check(
            "derivative",
            report.conclusive && report.ok,
            format!(
                "normalized power sample at ({}, {}): seminorm {:.4} <= bound {:.4}, hypothesis {:.6}",
                p.alpha, p.beta, report.derivative_seminorm, report.bound, report.hypothesis_value
            ),
        );
        let formula = derivative_bound(0.8, 0.7);
        o.check(
            "derivative-formula",
            (formula - FORMULA_REFERENCE).abs() < 1e-10,
            format!("bound formula at (0.8, 0.7) = {formula} vs reference {FORMULA_REFERENCE}"),
        );
        Ok(DerivativeSummary {
            alpha: p.alpha,
            beta: p.beta,
            hypothesis_value: report.hypothesis_value,
            derivative_seminorm: report.derivative_seminorm,
            bound: report.bound,
            formula_at_reference: formula,
        })
    })?;

    io::write_json(
        dir,
        "interp.json",
        &InterpSummary {
            max_principle,
            interpolation,
            derivative,
        },
    )?;
    Ok(())
}
