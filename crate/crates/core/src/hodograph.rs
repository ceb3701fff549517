//! Hodograph transform of a simulated layer.
//!
//! Near-planar interfaces are compared against the planar reference front
//! `gamma_ref(t) = gamma_ref(0) + integral of a`.  The *trace* is the scaled
//! deficit `(gamma_ref - gamma) / eps` on the interface; the *interior
//! hodograph field* extends it into the half-space coordinate `q >= 0`
//! (depth below the reference) by inverting the pressure along each vertical
//! column:
//!
//! ```text
//! ubar(x', q, t) = { s :  u(x', gamma_ref(t) - q - eps s, t) = q }
//! ```
//!
//! For monotone columns this is a single value; folded columns produce an
//! interval (the hull of all roots), represented as an [`Mval`].
//!
//! On the boundary `q = 0` the free-boundary condition becomes, exactly,
//!
//! ```text
//! d_t ubar = [ a (1 + eps d_n ubar) - 1 - eps^2 |D' ubar|^2 ]
//!            / ( eps (1 + eps d_n ubar) )
//! ```
//!
//! whose linearization at `a = 1` is the fractional heat flow
//! `d_t ubar = d_n ubar`.  The steady profile of slope `(1 - a)/(eps a)`
//! satisfies the relation identically, which the tests exploit as an exact
//! oracle.

use crate::error::{CoreError, Result};
use crate::front::Trajectory;
use crate::mval::Mval;
use crate::schedule::Schedule;
use alloc::format;
use alloc::vec::Vec;

/// Times are reported relative to the end of a run: a trajectory over
/// `[0, horizon]` covers relative times `[-horizon, 0]`.
pub fn relative_time(t_sim: f64, horizon: f64) -> f64 {
    t_sim - horizon
}

/// Scaled interface deficit `(gamma_ref - gamma) / eps` per lateral node.
pub fn trace_from_interface(gamma: &[f64], gamma_ref: f64, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(CoreError::Invalid {
            what: "flatness parameter",
            detail: format!("eps = {eps} must be positive"),
        });
    }
    Ok(gamma.iter().map(|g| (gamma_ref - g) / eps).collect())
}

/// Shape-preserving cubic slopes (Fritsch-Carlson limiting) for data `u` on
/// strictly increasing nodes `z`.
fn pchip_slopes(z: &[f64], u: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut m = alloc::vec![0.0; n];
    if n < 2 {
        return m;
    }
    let h: Vec<f64> = (0..n - 1).map(|i| z[i + 1] - z[i]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (u[i + 1] - u[i]) / h[i]).collect();
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // Shape-preserving one-sided endpoint slopes.
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 < 0.0 && libm::fabs(s) > 3.0 * libm::fabs(d0) {
            s = 3.0 * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], d[0], d[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn hermite(z0: f64, z1: f64, u0: f64, u1: f64, m0: f64, m1: f64, z: f64) -> f64 {
    let h = z1 - z0;
    let t = (z - z0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    u0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * h * (t3 - 2.0 * t2 + t)
        + u1 * (-2.0 * t3 + 3.0 * t2)
        + m1 * h * (t3 - t2)
}

/// Evaluates the shape-preserving cubic interpolant of `(z, u)` at `zq`
/// (clamped to the node range).
pub fn pchip_eval(z: &[f64], u: &[f64], zq: f64) -> f64 {
    let n = z.len();
    if zq <= z[0] {
        return u[0];
    }
    if zq >= z[n - 1] {
        return u[n - 1];
    }
    let m = pchip_slopes(z, u);
    let mut i = 0;
    while z[i + 1] < zq {
        i += 1;
    }
    hermite(z[i], z[i + 1], u[i], u[i + 1], m[i], m[i + 1], zq)
}

/// Hull of all solutions `z` of `interpolant(z) = level` along a column of
/// samples `u` on strictly increasing nodes `z`, using the shape-preserving
/// cubic through the data and bisection to absolute tolerance `tol`.
pub fn column_level_set(z: &[f64], u: &[f64], level: f64, tol: f64) -> Mval {
    let n = z.len();
    let m = pchip_slopes(z, u);
    let mut hull = Mval::Empty;
    let scale = u
        .iter()
        .fold(0.0f64, |s, &v| s.max(libm::fabs(v)))
        .max(libm::fabs(level))
        .max(1.0);
    let snap = 1e-13 * scale;

    for i in 0..n - 1 {
        let (f0, f1) = (u[i] - level, u[i + 1] - level);
        if libm::fabs(f0) <= snap {
            hull = hull.hull(Mval::singleton(z[i]));
        }
        if i == n - 2 && libm::fabs(f1) <= snap {
            hull = hull.hull(Mval::singleton(z[i + 1]));
        }
        if f0 * f1 < 0.0 {
            let mut lo = z[i];
            let mut hi = z[i + 1];
            let mut flo = f0;
            for _ in 0..200 {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let fm = hermite(z[i], z[i + 1], u[i], u[i + 1], m[i], m[i + 1], mid) - level;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            hull = hull.hull(Mval::singleton(0.5 * (lo + hi)));
        }
    }
    hull
}

/// Interior hodograph field of one snapshot: values `ubar(x'_i, q)` for each
/// requested depth `q` in `depths`, as (possibly multi-valued) intervals.
#[derive(Debug, Clone)]
pub struct HodographField {
    /// Depths `q >= 0` the field was evaluated at.
    pub depths: Vec<f64>,
    /// Row-major values: entry `[k * nx + i]` is `ubar(x'_i, depths[k])`.
    pub values: Vec<Mval>,
    /// Lateral node count.
    pub nx: usize,
}

impl HodographField {
    /// Value at depth index `k`, lateral node `i`.
    pub fn at(&self, k: usize, i: usize) -> &Mval {
        &self.values[k * self.nx + i]
    }
}

/// Computes the interior hodograph field of a solved snapshot.
///
/// `gamma` and `field` are the interface and the full pressure field (node
/// rows `0..=ny`) of one snapshot on `grid` over bottom depth `base_depth`;
/// `gamma_ref` is the planar reference height at that time.  Depths must be
/// nonnegative.  A depth whose level set misses the column entirely yields
/// an empty value there.
pub fn interior_hodograph(
    grid: &crate::grid::StripGrid,
    base_depth: f64,
    gamma: &[f64],
    field: &[f64],
    gamma_ref: f64,
    eps: f64,
    depths: &[f64],
) -> Result<HodographField> {
    if !(eps > 0.0) {
        return Err(CoreError::Invalid {
            what: "flatness parameter",
            detail: format!("eps = {eps} must be positive"),
        });
    }
    if depths.iter().any(|&q| !(q >= 0.0)) {
        return Err(CoreError::Invalid {
            what: "hodograph depths",
            detail: "all depths must be nonnegative".into(),
        });
    }
    let nx = grid.nx();
    let ny = grid.ny();
    if gamma.len() != nx || field.len() != nx * (ny + 1) {
        return Err(CoreError::Invalid {
            what: "snapshot arrays",
            detail: format!(
                "gamma {} / field {} on a {nx} x {ny} strip",
                gamma.len(),
                field.len()
            ),
        });
    }

    let mut values = Vec::with_capacity(depths.len() * nx);
    let mut zcol = alloc::vec![0.0; ny + 1];
    let mut ucol = alloc::vec![0.0; ny + 1];
    for &q in depths {
        for i in 0..nx {
            let d = gamma[i] + base_depth;
            for j in 0..=ny {
                zcol[j] = (j as f64 / ny as f64) * d - base_depth;
                ucol[j] = field[j * nx + i];
            }
            let zset = column_level_set(&zcol, &ucol, q, 1e-12);
            let v = match zset {
                Mval::Empty => Mval::Empty,
                _ => {
                    let zlo = zset.lo().unwrap();
                    let zhi = zset.hi().unwrap();
                    // s = (gamma_ref - q - z)/eps is decreasing in z.
                    Mval::interval((gamma_ref - q - zhi) / eps, (gamma_ref - q - zlo) / eps)
                        .unwrap()
                }
            };
            values.push(v);
        }
    }
    Ok(HodographField {
        depths: depths.to_vec(),
        values,
        nx,
    })
}

/// Pointwise residual of the exact boundary speed relation on one recorded
/// snapshot of a trajectory.
#[derive(Debug, Clone)]
pub struct BoundaryRelationReport {
    /// Largest absolute residual over lateral nodes.
    pub max_residual: f64,
    /// Largest absolute time derivative of the trace (scale for the
    /// residual).
    pub scale: f64,
    /// Per-node residuals.
    pub residuals: Vec<f64>,
}

/// Checks `d_t ubar` against
/// `[a (1 + eps d_n ubar) - 1 - eps^2 |D' ubar|^2] / (eps (1 + eps d_n ubar))`
/// at snapshot `index` (which must have neighbours on both sides).
///
/// `gamma_ref0` is the reference height at the first snapshot; the
/// reference then advances with the influx integral.  The depth derivative
/// is taken one-sidedly from the interior hodograph at depths `{dq, 2 dq}`.
pub fn boundary_relation_residual(
    traj: &Trajectory,
    influx: &Schedule,
    gamma_ref0: f64,
    eps: f64,
    index: usize,
    dq: f64,
) -> Result<BoundaryRelationReport> {
    if index == 0 || index + 1 >= traj.snapshots.len() {
        return Err(CoreError::Invalid {
            what: "snapshot index",
            detail: format!(
                "{index} has no two-sided neighbours in a {}-snapshot trajectory",
                traj.snapshots.len()
            ),
        });
    }
    if !(dq > 0.0) {
        return Err(CoreError::Invalid {
            what: "depth increment",
            detail: format!("dq = {dq} must be positive"),
        });
    }
    let nx = traj.grid.nx();
    let hx = traj.grid.x().h();
    let t0 = traj.snapshots[0].time;
    let gref = |t: f64| gamma_ref0 + influx.integral(t0, t);

    let prev = &traj.snapshots[index - 1];
    let here = &traj.snapshots[index];
    let next = &traj.snapshots[index + 1];

    let s_prev = trace_from_interface(&prev.gamma, gref(prev.time), eps)?;
    let s_here = trace_from_interface(&here.gamma, gref(here.time), eps)?;
    let s_next = trace_from_interface(&next.gamma, gref(next.time), eps)?;

    let hod = interior_hodograph(
        &traj.grid,
        traj.base_depth,
        &here.gamma,
        &here.field,
        gref(here.time),
        eps,
        &[dq, 2.0 * dq],
    )?;
    let mid = |m: &Mval| match (m.lo(), m.hi()) {
        (Some(lo), Some(hi)) => Ok(0.5 * (lo + hi)),
        _ => Err(CoreError::Degenerate {
            what: "hodograph probe",
            detail: "level set missed the column at the probe depth".into(),
        }),
    };

    let a = influx.value_at(here.time);
    let dt_span = next.time - prev.time;
    let mut residuals = Vec::with_capacity(nx);
    let mut max_res = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..nx {
        let st = (s_next[i] - s_prev[i]) / dt_span;
        let s1 = mid(hod.at(0, i))?;
        let s2 = mid(hod.at(1, i))?;
        let sq = (-3.0 * s_here[i] + 4.0 * s1 - s2) / (2.0 * dq);
        let sx = (s_here[(i + 1) % nx] - s_here[(i + nx - 1) % nx]) / (2.0 * hx);
        let denom = 1.0 + eps * sq;
        if !(denom > 0.0) {
            return Err(CoreError::Degenerate {
                what: "hodograph slope",
                detail: format!("1 + eps d_n ubar = {denom} at node {i}"),
            });
        }
        let rhs = (a * denom - 1.0 - eps * eps * sx * sx) / (eps * denom);
        let r = st - rhs;
        residuals.push(r);
        max_res = max_res.max(libm::fabs(r));
        scale = scale.max(libm::fabs(st));
    }
    Ok(BoundaryRelationReport {
        max_residual: max_res,
        scale,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Mapping;
    use crate::front::{dt_max, run, InterfaceState};
    use crate::grid::{PeriodicGrid1D, StripGrid};

    fn strip(nx: usize, ny: usize) -> StripGrid {
        StripGrid::new(PeriodicGrid1D::with_default_length(nx).unwrap(), ny).unwrap()
    }

    #[test]
    fn planar_trace_is_constant_offset() {
        let gamma = alloc::vec![0.3; 8];
        let tr = trace_from_interface(&gamma, 0.5, 0.1).unwrap();
        for v in tr {
            assert!((v - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_field_of_planar_slope_matches_closed_form() {
        // Exact discrete planar solution u = a (gamma - z); reference offset
        // eps c above the front.  Expected: ubar(q) = c + q (1 - a)/(eps a).
        let nx = 16;
        let ny = 32;
        let grid = strip(nx, ny);
        let a = 2.0;
        let eps = 0.05;
        let c = 0.7;
        let gamma = alloc::vec![0.4; nx];
        let m = Mapping::build(grid.clone(), 2.0, &gamma).unwrap();
        let (field, _) = m.solve(&alloc::vec![0.0; nx], a).unwrap();
        let gamma_ref = 0.4 + eps * c;
        let depths = [0.0, 0.1, 0.25, 0.5, 1.0];
        let hod =
            interior_hodograph(&grid, 2.0, &gamma, &field, gamma_ref, eps, &depths).unwrap();
        for (k, &q) in depths.iter().enumerate() {
            let expect = c + q * (1.0 - a) / (eps * a);
            for i in 0..nx {
                let v = hod.at(k, i);
                let (lo, hi) = (v.lo().unwrap(), v.hi().unwrap());
                assert!(
                    (lo - expect).abs() < 1e-8 && (hi - expect).abs() < 1e-8,
                    "q = {q}: got [{lo}, {hi}] expected {expect}"
                );
            }
        }
    }

    #[test]
    fn folded_column_yields_an_interval() {
        // Hand-built non-monotone column: u rises, dips, rises again, so the
        // level 0.5 is hit three times; the hull spans the outer roots.
        let z = [0.0, 1.0, 2.0, 3.0, 4.0];
        let u = [0.0, 1.0, 0.2, 1.2, 2.0];
        let set = column_level_set(&z, &u, 0.5, 1e-12);
        let lo = set.lo().unwrap();
        let hi = set.hi().unwrap();
        assert!(lo > 0.0 && lo < 1.0, "first root {lo}");
        assert!(hi > 2.0 && hi < 3.0, "last root {hi}");
    }

    #[test]
    fn level_outside_range_is_empty() {
        let z = [0.0, 1.0, 2.0];
        let u = [0.0, 1.0, 2.0];
        assert!(column_level_set(&z, &u, 5.0, 1e-12).is_empty());
    }

    #[test]
    fn node_exact_level_is_found() {
        let z = [0.0, 1.0, 2.0];
        let u = [0.0, 1.0, 2.0];
        let set = column_level_set(&z, &u, 1.0, 1e-12);
        assert!((set.lo().unwrap() - 1.0).abs() < 1e-12);
        assert!((set.hi().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planar_run_satisfies_the_speed_relation_exactly() {
        // Planar front under influx 2: trace and interior slope are the
        // steady profile, so the relation's residual is solver-level only.
        let nx = 16;
        let grid = strip(nx, 16);
        let influx = Schedule::constant(2.0).unwrap();
        let initial =
            InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.0; nx], 0.0).unwrap();
        let dt = dt_max(&grid, 2.0);
        let traj = run(initial, &influx, 0.2, dt, 9).unwrap();
        let eps = 0.05;
        // Reference displaced by eps * 0.3 above the initial front.
        let rep =
            boundary_relation_residual(&traj, &influx, eps * 0.3, eps, 4, 0.1).unwrap();
        assert!(rep.max_residual < 1e-7, "residual {}", rep.max_residual);
    }

    #[test]
    fn trace_bound_is_equivalent_to_the_sandwich() {
        // sup |trace| <= M over a run iff the interface stays within
        // eps * M of the planar reference, in both directions.
        let nx = 32;
        let grid = strip(nx, 16);
        let influx = Schedule::new(&[(0.0, 1.0), (0.12, 1.5)]).unwrap();
        let eps = 0.04;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| 0.02 * libm::cos(grid.x().node(i)))
            .collect();
        let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.5);
        let traj = run(initial, &influx, 0.25, dt, 6).unwrap();

        // Largest trace magnitude across all snapshots, reference at 0.
        let t0 = traj.snapshots[0].time;
        let mut m = 0.0f64;
        for snap in &traj.snapshots {
            let gref = influx.integral(t0, snap.time);
            let tr = trace_from_interface(&snap.gamma, gref, eps).unwrap();
            for v in tr {
                m = m.max(libm::fabs(v));
            }
        }
        assert!(m > 0.0);

        let pass = crate::front::flatness_check(&traj, &influx, 0.0, eps * m * (1.0 + 1e-9))
            .unwrap();
        assert!(pass.ok, "margin {}", pass.margin);
        let fail = crate::front::flatness_check(&traj, &influx, 0.0, eps * m * (1.0 - 1e-6))
            .unwrap();
        assert!(!fail.ok, "margin {}", fail.margin);
        // The worst deviation is exactly eps times the trace bound.
        assert!((pass.worst_deviation - eps * m).abs() < 1e-12 * (1.0 + eps * m));
    }

    #[test]
    fn wavy_run_satisfies_the_speed_relation_to_discretization() {
        let nx = 128;
        let ny = 64;
        let grid = strip(nx, ny);
        let influx = Schedule::constant(1.0).unwrap();
        let k = 2usize;
        let delta = 0.01;
        let eps = delta;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| delta * libm::cos(k as f64 * grid.x().node(i)))
            .collect();
        let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let dt = 0.25 * dt_max(&grid, 1.0);
        let traj = run(initial, &influx, 0.1, dt, 11).unwrap();
        let rep = boundary_relation_residual(&traj, &influx, 0.0, eps, 5, 0.05).unwrap();
        // d_t ubar ~ 2 tanh(4) ~ 2; the residual carries field truncation
        // and snapshot-differencing error.
        assert!(rep.scale > 1.0, "scale {}", rep.scale);
        assert!(
            rep.max_residual < 0.1 * rep.scale,
            "residual {} vs scale {}",
            rep.max_residual,
            rep.scale
        );
    }
}
