//! Deformation comparisons: inversion (Kelvin) and shear families
//! applied to a solution profile, with the deformed hodograph compared
//! against the original plus its first-order correction.
//!
//! Stage `identities` verifies the exact algebra the comparisons rest
//! on: inversion round-trip and defining identity to 1e-10, conformality
//! of the shear exponential to 1e-12, and the closed-form
//! rotation-scaling matrix exponential to 1e-14.  Stage `sweep` shrinks
//! the deformation size through the configured values for both families;
//! the hodograph discrepancy after removing the first-order correction
//! must decrease monotonically, end below the configured ceiling, and
//! regress with a log-log slope at least the working exponent.

use crate::config::RunConfig;
use crate::io::{self, CsvTable};
use crate::manifest::Outcome;
use crate::outdir::OutputDir;
use crate::Result;
use heleshaw_core::analysis::fit_loglog_slope;
use heleshaw_core::deform::{
    inversion_inverse, inversion_map, shear_generator, verify_inversion_comparison,
    verify_shear_comparison, FieldPatch, Mat2, PatchGeometry,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
struct IdentitySummary {
    roundtrip_sup: f64,
    defining_sup: f64,
    conformality_sup: f64,
    exponential_sup: f64,
    rho: f64,
}

#[derive(Serialize)]
struct FamilySummary {
    sizes: Vec<f64>,
    discrepancies: Vec<f64>,
    slope: f64,
    smallest: f64,
    ceiling: f64,
}

#[derive(Serialize)]
struct DeformSummary {
    identities: IdentitySummary,
    inversion: FamilySummary,
    shear: FamilySummary,
    alpha_cfg: f64,
}

const ROUNDTRIP_TOL: f64 = 1e-10;
const CONFORMAL_TOL: f64 = 1e-12;
const EXP_TOL: f64 = 1e-14;

/// The solution profile both families deform: the planar solution
/// sampled on a patch comfortably containing the unit half-ball.
fn planar_patch() -> Result<FieldPatch> {
    let geom = PatchGeometry::new(-1.7, -0.55, 3.4 / 127.0, 2.35 / 127.0, 128, 128)?;
    Ok(FieldPatch::from_fn(geom, |_, xn| xn)?)
}

pub fn run(cfg: &RunConfig, outcome: &mut Outcome, dir: &OutputDir) -> Result<()> {
    let d = &cfg.deform;
    let p = [d.p.0, d.p.1];
    let p_norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let smallest_size = *d.sweep.last().unwrap();

    let identities = outcome.stage("identities", |o| {
        // Inversion algebra at the radius of the smallest swept size.
        let rho = 1.0 / (smallest_size.min(0.1));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        let mut roundtrip = 0.0f64;
        let mut defining = 0.0f64;
        for _ in 0..2000 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..0.0)];
            let y = inversion_map(rho, x);
            let back = inversion_inverse(rho, y);
            roundtrip = roundtrip
                .max((back[0] - x[0]).abs())
                .max((back[1] - x[1]).abs());
            // |Phi(x) + rho e_n| * |x - rho e_n| = rho^2.
            let a = ((y[0]) * (y[0]) + (y[1] + rho) * (y[1] + rho)).sqrt();
            let b = ((x[0]) * (x[0]) + (x[1] - rho) * (x[1] - rho)).sqrt();
            defining = defining.max((a * b - rho * rho).abs() / (rho * rho));
        }
        o.check(
            "inversion-identities",
            roundtrip <= ROUNDTRIP_TOL && defining <= ROUNDTRIP_TOL,
            format!(
                "round-trip sup {roundtrip:.3e}, defining identity sup {defining:.3e} (tol {ROUNDTRIP_TOL:.0e})"
            ),
        );

        // Shear algebra across the swept sizes.
        let gen = shear_generator(p);
        let mut conformality = 0.0f64;
        let mut exponential = 0.0f64;
        for &size in &d.sweep {
            let eps = size / p_norm;
            let em = gen.scale(-eps).exp();
            let gram = em.mul(&em.transpose());
            let scale = (-2.0 * eps * p[1]).exp();
            for (idx, want) in [scale, 0.0, 0.0, scale].iter().enumerate() {
                conformality = conformality.max((gram.0[idx] - want).abs());
            }
            // Closed form: e^{eps M} = e^{eps p_n} Rot(eps p_1).
            let ep = gen.scale(eps).exp();
            let (c, s) = ((eps * p[0]).cos(), (eps * p[0]).sin());
            let m = (eps * p[1]).exp();
            let closed = Mat2([m * c, -m * s, m * s, m * c]);
            for idx in 0..4 {
                exponential = exponential.max((ep.0[idx] - closed.0[idx]).abs());
            }
        }
        o.check(
            "shear-identities",
            conformality <= CONFORMAL_TOL && exponential <= EXP_TOL,
            format!(
                "conformality sup {conformality:.3e} (tol {CONFORMAL_TOL:.0e}), matrix exponential sup {exponential:.3e} (tol {EXP_TOL:.0e})"
            ),
        );
        Ok(IdentitySummary {
            roundtrip_sup: roundtrip,
            defining_sup: defining,
            conformality_sup: conformality,
            exponential_sup: exponential,
            rho,
        })
    })?;

    let (inversion, shear) = outcome.stage("sweep", |o| {
        let patch = planar_patch()?;
        let mut table = CsvTable::new(&[
            "family",
            "size",
            "sup_discrepancy",
            "boundary_discrepancy",
            "evaluated",
            "masked",
        ]);

        let run_family = |name: &str,
                              o: &mut Outcome,
                              table: &mut CsvTable,
                              eval: &mut dyn FnMut(f64) -> Result<(f64, f64, usize, usize)>|
         -> Result<FamilySummary> {
            let mut sups = Vec::new();
            for &size in &d.sweep {
                let (sup, boundary, evaluated, masked) = eval(size)?;
                table.push(vec![
                    name.to_string(),
                    io::fmt_f64(size),
                    io::fmt_f64(sup),
                    io::fmt_f64(boundary),
                    io::fmt_f64(evaluated as f64),
                    io::fmt_f64(masked as f64),
                ]);
                sups.push(sup);
            }
            let monotone = sups.windows(2).all(|w| w[1] < w[0]);
            let smallest = *sups.last().unwrap();
            let samples: Vec<(f64, f64)> = d
                .sweep
                .iter()
                .cloned()
                .zip(sups.iter().cloned())
                .collect();
            let slope = fit_loglog_slope(&samples)?;
            o.check(
                &format!("{name}-sweep"),
                monotone && smallest <= d.sigma && slope >= d.alpha_cfg,
                format!(
                    "discrepancies {sups:?} monotone, smallest {smallest:.4} <= {}, slope {slope:.3} >= {}",
                    d.sigma, d.alpha_cfg
                ),
            );
            Ok(FamilySummary {
                sizes: d.sweep.clone(),
                discrepancies: sups,
                slope,
                smallest,
                ceiling: d.sigma,
            })
        };

        let inversion = run_family("inversion", o, &mut table, &mut |size| {
            let r = verify_inversion_comparison(&patch, d.b, size / d.b, 2, d.resolution)?;
            Ok((
                r.sup_discrepancy,
                r.boundary_discrepancy,
                r.evaluated,
                r.masked,
            ))
        })?;
        let shear = run_family("shear", o, &mut table, &mut |size| {
            let r = verify_shear_comparison(&patch, p, size / p_norm, d.resolution)?;
            Ok((
                r.sup_discrepancy,
                r.boundary_discrepancy,
                r.evaluated,
                r.masked,
            ))
        })?;

        table.write(dir, "deform.csv")?;
        Ok((inversion, shear))
    })?;

    io::write_json(
        dir,
        "deform.json",
        &DeformSummary {
            identities,
            inversion,
            shear,
            alpha_cfg: d.alpha_cfg,
        },
    )?;
    Ok(())
}
