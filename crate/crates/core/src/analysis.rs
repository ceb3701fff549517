//! Measurement suite over boundary hodograph traces.
//!
//! Everything here consumes a [`TraceSeries`] — the rescaled front deficit
//! `(gamma_ref(t) - gamma(x', t)) / eps` sampled on the lateral lattice at
//! the recorded snapshot times — and produces numbers: the gap to the
//! linearized finite-depth evolution, oscillation decay across shrinking
//! product cylinders, the bootstrap ladder of difference-quotient
//! seminorms, the Holder seminorm of the lateral derivative, and the
//! damped density ODE that converts measure information into a lower
//! barrier.

use crate::error::{CoreError, Result};
use crate::front::Trajectory;
use crate::grid::PeriodicGrid1D;
use crate::metric::ParabolicPoint;
use crate::schedule::Schedule;
use crate::seminorm::trunc_holder_scalar;
use crate::spectral::evolve_dtn_heat;
use alloc::format;
use alloc::vec::Vec;

/// Boundary hodograph trace on the product lattice: `values[j * nx + i]`
/// is the deficit at lateral node `i` and snapshot time `times[j]`.
#[derive(Debug, Clone)]
pub struct TraceSeries {
    grid: PeriodicGrid1D,
    times: Vec<f64>,
    values: Vec<f64>,
    eps: f64,
}

impl TraceSeries {
    /// Validating constructor for an externally assembled trace.
    pub fn new(grid: PeriodicGrid1D, times: Vec<f64>, values: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(CoreError::Invalid {
                what: "flatness parameter",
                detail: format!("eps = {eps} must be positive"),
            });
        }
        if times.len() < 2 {
            return Err(CoreError::Invalid {
                what: "trace times",
                detail: format!("{} snapshot(s); need at least 2", times.len()),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CoreError::Invalid {
                what: "trace times",
                detail: "times must be strictly increasing".into(),
            });
        }
        if values.len() != times.len() * grid.n() {
            return Err(CoreError::Invalid {
                what: "trace values",
                detail: format!(
                    "{} values for {} times x {} nodes",
                    values.len(),
                    times.len(),
                    grid.n()
                ),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Invalid {
                what: "trace values",
                detail: "non-finite sample".into(),
            });
        }
        Ok(Self {
            grid,
            times,
            values,
            eps,
        })
    }

    /// Builds the boundary trace of a trajectory: the deficit of each
    /// snapshot interface below the advancing planar reference
    /// `mean(gamma_0) + A(t)`, rescaled by `eps`.
    pub fn from_trajectory(traj: &Trajectory, influx: &Schedule, eps: f64) -> Result<Self> {
        if traj.snapshots.is_empty() {
            return Err(CoreError::Invalid {
                what: "trajectory",
                detail: "no snapshots".into(),
            });
        }
        let grid = traj.grid.x().clone();
        let first = &traj.snapshots[0];
        let t0 = first.time;
        if influx.start() > t0 + 1e-12 {
            return Err(CoreError::Invalid {
                what: "influx schedule",
                detail: format!(
                    "schedule starts at {} after the first snapshot {t0}",
                    influx.start()
                ),
            });
        }
        let gamma0 = first.gamma.iter().sum::<f64>() / first.gamma.len() as f64;
        let mut times = Vec::with_capacity(traj.snapshots.len());
        let mut values = Vec::with_capacity(traj.snapshots.len() * grid.n());
        for snap in &traj.snapshots {
            let gref = gamma0 + influx.integral(t0, snap.time);
            times.push(snap.time);
            values.extend(crate::hodograph::trace_from_interface(
                &snap.gamma,
                gref,
                eps,
            )?);
        }
        Self::new(grid, times, values, eps)
    }

    /// Lateral grid.
    pub fn grid(&self) -> &PeriodicGrid1D {
        &self.grid
    }

    /// Snapshot times, strictly increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Flatness scale the trace was built with.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Number of snapshots.
    pub fn nt(&self) -> usize {
        self.times.len()
    }

    /// Number of lateral nodes.
    pub fn nx(&self) -> usize {
        self.grid.n()
    }

    /// Sample at snapshot `j`, node `i`.
    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    /// One snapshot row.
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[j * n..(j + 1) * n]
    }

    /// Supremum norm over the whole series.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for v in &self.values {
            let a = libm::fabs(*v);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Flatness record `N = sup norm + 1`.
    pub fn flatness_constant(&self) -> f64 {
        self.sup_norm() + 1.0
    }

    /// Sub-series over the inclusive snapshot range `j0..=j1`.
    pub fn window(&self, j0: usize, j1: usize) -> Result<TraceSeries> {
        if j0 >= j1 || j1 >= self.nt() {
            return Err(CoreError::Invalid {
                what: "trace window",
                detail: format!("range {j0}..={j1} within 0..{}", self.nt()),
            });
        }
        let n = self.grid.n();
        TraceSeries::new(
            self.grid.clone(),
            self.times[j0..=j1].to_vec(),
            self.values[j0 * n..(j1 + 1) * n].to_vec(),
            self.eps,
        )
    }
}

/// Least-squares slope of `ln y` against `ln x`; every sample must be
/// strictly positive in both coordinates.
pub fn fit_loglog_slope(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(CoreError::Invalid {
            what: "regression samples",
            detail: format!("{} sample(s); need at least 2", samples.len()),
        });
    }
    if samples.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(CoreError::Invalid {
            what: "regression samples",
            detail: "log-log regression needs strictly positive samples".into(),
        });
    }
    let n = samples.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in samples {
        let lx = libm::log(x);
        let ly = libm::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if libm::fabs(denom) < 1e-300 {
        return Err(CoreError::Invalid {
            what: "regression abscissae",
            detail: "all samples share one abscissa".into(),
        });
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Gap between a simulated trace and the exact linearized evolution.
#[derive(Debug, Clone)]
pub struct LinearizationReport {
    /// Supremum of the per-time gaps.
    pub gap: f64,
    /// `(time, sup-norm gap at that time)` for every snapshot after the first.
    pub per_time: Vec<(f64, f64)>,
    /// Mean layer depth the linear model started from.
    pub depth0: f64,
}

/// Evolves the initial trace row under the finite-depth linear flow with
/// the run's own influx schedule (the layer deepens with the influx
/// integral) and reports the sup-norm gap against the simulated rows.
pub fn linearization_gap(
    series: &TraceSeries,
    depth0: f64,
    influx: &Schedule,
) -> Result<LinearizationReport> {
    if !(depth0 > 0.0) {
        return Err(CoreError::Invalid {
            what: "layer depth",
            detail: format!("depth0 = {depth0} must be positive"),
        });
    }
    let t0 = series.times()[0];
    if influx.start() > t0 + 1e-12 {
        return Err(CoreError::Invalid {
            what: "influx schedule",
            detail: format!("schedule starts at {} after the trace at {t0}", influx.start()),
        });
    }
    let w0 = series.row(0).to_vec();
    let mut per_time = Vec::with_capacity(series.nt() - 1);
    let mut gap = 0.0f64;
    for j in 1..series.nt() {
        let t = series.times()[j];
        let predicted = evolve_dtn_heat(series.grid(), &w0, influx, t0, t, depth0)?;
        let mut local = 0.0f64;
        for (p, v) in predicted.iter().zip(series.row(j)) {
            let d = libm::fabs(p - v);
            if d > local {
                local = d;
            }
        }
        per_time.push((t, local));
        if local > gap {
            gap = local;
        }
    }
    Ok(LinearizationReport {
        gap,
        per_time,
        depth0,
    })
}

/// Oscillation decay across shrinking product cylinders.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Cylinder radii, largest first, geometric with ratio `mu_bar`.
    pub radii: Vec<f64>,
    /// Oscillation of the trace over each cylinder.
    pub oscillations: Vec<f64>,
    /// Number of lattice samples in each cylinder.
    pub sample_counts: Vec<usize>,
    /// Per-step contraction factors `osc[m+1] / osc[m]`.
    pub contractions: Vec<f64>,
    /// Worst-case decay rate `1 - max(contractions)`.
    pub theta_hat: f64,
    /// Fitted exponent `ln(1 - theta_hat) / ln(mu_bar)`.
    pub alpha_hat: f64,
    /// Scale ratio between consecutive cylinders.
    pub mu_bar: f64,
    /// Set when the base oscillation is too small to fit factors.
    pub degenerate: bool,
    /// Index of the first requested level that fell below the truncation
    /// scale or the lattice, if the ladder stopped early.
    pub truncated_after: Option<usize>,
}

/// Measures the trace oscillation over the nested cylinders
/// `B_r(center) x (t_top - r, t_top]` with radii `base_radius * mu_bar^m`,
/// stopping at the truncation scale, and fits the per-step contraction.
pub fn oscillation_decay(
    series: &TraceSeries,
    center: f64,
    base_radius: f64,
    levels: usize,
    mu_bar: f64,
    truncation: f64,
) -> Result<DecayReport> {
    if !(mu_bar > 0.0 && mu_bar < 1.0) {
        return Err(CoreError::Invalid {
            what: "scale ratio",
            detail: format!("mu_bar = {mu_bar} must lie in (0, 1)"),
        });
    }
    if !(base_radius > 0.0) || levels < 2 {
        return Err(CoreError::Invalid {
            what: "cylinder schedule",
            detail: format!("base radius {base_radius} and levels {levels} (need >= 2)"),
        });
    }
    if !(truncation >= 0.0) {
        return Err(CoreError::Invalid {
            what: "truncation scale",
            detail: format!("{truncation} must be nonnegative"),
        });
    }
    let t_top = *series.times().last().unwrap();
    let hx = series.grid().h();
    let dt_min = series
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);

    let mut radii = Vec::new();
    let mut oscillations = Vec::new();
    let mut sample_counts = Vec::new();
    let mut truncated_after = None;
    for m in 0..levels {
        let r = base_radius * libm::pow(mu_bar, m as f64);
        // A cylinder is measurable when it clears the truncation scale and
        // holds at least a 2 x 2 patch of lattice samples.
        if r < truncation || r < hx || r < dt_min {
            if m == 0 {
                return Err(CoreError::Unresolved {
                    what: "oscillation cylinder",
                    detail: format!(
                        "base radius {r} under truncation {truncation} or lattice ({hx}, {dt_min})"
                    ),
                });
            }
            truncated_after = Some(m);
            break;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut count = 0usize;
        for (j, &t) in series.times().iter().enumerate() {
            if !(t > t_top - r - 1e-12 * base_radius) {
                continue;
            }
            for i in 0..series.nx() {
                let dx = series.grid().min_image(series.grid().node(i) - center);
                if libm::fabs(dx) <= r + 1e-12 * base_radius {
                    let v = series.value(j, i);
                    lo = lo.min(v);
                    hi = hi.max(v);
                    count += 1;
                }
            }
        }
        if count < 4 {
            if m == 0 {
                return Err(CoreError::Unresolved {
                    what: "oscillation cylinder",
                    detail: format!("base radius {r} captures only {count} lattice samples"),
                });
            }
            truncated_after = Some(m);
            break;
        }
        radii.push(r);
        oscillations.push(hi - lo);
        sample_counts.push(count);
    }

    let scale = series.sup_norm().max(1.0);
    let degenerate = oscillations[0] <= 1e-10 * scale;
    let mut contractions = Vec::new();
    if !degenerate {
        for m in 0..oscillations.len() - 1 {
            if oscillations[m] <= 1e-14 * scale {
                break;
            }
            contractions.push(oscillations[m + 1] / oscillations[m]);
        }
    }
    let (theta_hat, alpha_hat) = if contractions.is_empty() {
        (0.0, 0.0)
    } else {
        let worst = contractions.iter().cloned().fold(0.0f64, f64::max);
        let theta = 1.0 - worst;
        let alpha = if theta > 0.0 {
            libm::log(1.0 - theta) / libm::log(mu_bar)
        } else {
            0.0
        };
        (theta, alpha)
    };
    Ok(DecayReport {
        radii,
        oscillations,
        sample_counts,
        contractions,
        theta_hat,
        alpha_hat,
        mu_bar,
        degenerate,
        truncated_after,
    })
}

/// One rung of the bootstrap ladder.
#[derive(Debug, Clone)]
pub struct LadderRung {
    /// Rung index.
    pub k: usize,
    /// Difference-quotient exponent `alpha/2 + k alpha`.
    pub beta: f64,
    /// Holder exponent `(alpha/2) * alpha^k` measured on the quotient field.
    pub eta: f64,
    /// Nominal shrinking radius `16^-(k+1)` of the bootstrap schedule.
    pub nominal_radius: f64,
    /// Radius actually used: the nominal one, raised to the working lattice
    /// floor and rounded outward to a coarse-lattice multiple.
    pub effective_radius: f64,
    /// Truncation below which pairs and steps are discarded.
    pub truncation: f64,
    /// Measured value: sup over admissible lattice steps of the truncated
    /// Holder seminorm of the step quotient over the rung cylinder.
    pub seminorm: f64,
    /// Number of lattice steps that entered the supremum.
    pub step_count: usize,
    /// Whether the measured value is within the configured bound.
    pub pass: bool,
}

/// Full ladder report.
#[derive(Debug, Clone)]
pub struct LadderReport {
    /// Base exponent the schedule was built from.
    pub alpha: f64,
    /// Configured bound each rung is compared against.
    pub bound: f64,
    /// Evaluated rungs, lowest exponent first.
    pub rungs: Vec<LadderRung>,
    /// Set when scheduled rungs had to be dropped for lack of resolution.
    pub under_resolved: bool,
}

/// Configuration for [`bootstrap_ladder`].
#[derive(Debug, Clone)]
pub struct LadderParams {
    /// Base exponent of the rung schedule.
    pub alpha: f64,
    /// Bound the rung seminorms are compared against.
    pub bound: f64,
    /// Truncation scale (typically a fixed multiple of `eps`).
    pub truncation: f64,
    /// Minimum number of coarse cells a rung radius must span.
    pub min_cells: usize,
    /// Lateral center of the cylinders.
    pub center: f64,
    /// Coarse lateral lattice spacing: steps, radii, and evaluation points
    /// are pinned to this lattice so refined runs measure the identical
    /// functional.
    pub coarse_h: f64,
    /// Coarse snapshot spacing, same role in time.
    pub coarse_dt: f64,
}

/// Seminorm of the `h`-step quotient field over one cylinder.
///
/// Evaluation points are the coarse sub-lattice inside
/// `B_radius(center) x (t_top - radius, t_top]`; the steps `h` run over
/// coarse multiples in `(truncation, h_max]`; each quotient field
/// `(v(x + h, t) - v(x, t)) / h^beta` is measured in the truncated
/// `C^eta` seminorm of the boundary metric.  Returns the sup over steps
/// and the number of steps used.
#[allow(clippy::too_many_arguments)]
pub fn rung_seminorm(
    series: &TraceSeries,
    beta: f64,
    eta: f64,
    radius: f64,
    h_max: f64,
    truncation: f64,
    center: f64,
    coarse_h: f64,
    coarse_dt: f64,
) -> Result<(f64, usize)> {
    let stride = series.grid().lattice_multiple(coarse_h)?;
    let t_top = *series.times().last().unwrap();

    // Coarse evaluation points inside the cylinder.
    let mut idx: Vec<(usize, usize)> = Vec::new();
    let mut points: Vec<ParabolicPoint> = Vec::new();
    for (j, &t) in series.times().iter().enumerate() {
        if !(t > t_top - radius - 1e-9) {
            continue;
        }
        let steps_back = (t_top - t) / coarse_dt;
        if libm::fabs(steps_back - libm::round(steps_back)) > 1e-6 {
            continue;
        }
        for i in (0..series.nx()).step_by(stride) {
            let dx = series.grid().min_image(series.grid().node(i) - center);
            if libm::fabs(dx) <= radius + 1e-9 {
                idx.push((j, i));
                points.push(ParabolicPoint::boundary(center + dx, t - t_top)?);
            }
        }
    }
    if points.len() < 2 {
        return Err(CoreError::Unresolved {
            what: "ladder cylinder",
            detail: format!(
                "radius {radius} captures {} coarse sample(s)",
                points.len()
            ),
        });
    }

    let mut sup = 0.0f64;
    let mut used = 0usize;
    let mut m = 1usize;
    loop {
        let h = m as f64 * coarse_h;
        if h > h_max + 1e-12 {
            break;
        }
        if h > truncation {
            let scale = libm::pow(h, -beta);
            let field: Vec<f64> = idx
                .iter()
                .map(|&(j, i)| {
                    let ip = (i + m * stride) % series.nx();
                    (series.value(j, ip) - series.value(j, i)) * scale
                })
                .collect();
            let report = trunc_holder_scalar(
                &points,
                &field,
                eta,
                truncation,
                Some(series.grid().len()),
            )?;
            if report.value > sup {
                sup = report.value;
            }
            used += 1;
        }
        m += 1;
    }
    if used == 0 {
        return Err(CoreError::Unresolved {
            what: "ladder steps",
            detail: format!("no lattice step in ({truncation}, {h_max}]"),
        });
    }
    Ok((sup, used))
}

/// Runs the bootstrap ladder over the rung schedule
/// `beta_k = alpha/2 + k alpha`, `eta_k = (alpha/2) alpha^k`,
/// nominal radius `16^-(k+1)`, for every rung with `beta_k <= 1`.
pub fn bootstrap_ladder(series: &TraceSeries, params: &LadderParams) -> Result<LadderReport> {
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(CoreError::Invalid {
            what: "ladder exponent",
            detail: format!("alpha = {} must lie in (0, 1)", params.alpha),
        });
    }
    if !(params.bound > 0.0) || params.min_cells < 2 {
        return Err(CoreError::Invalid {
            what: "ladder configuration",
            detail: format!(
                "bound {} and min_cells {} (need > 0 and >= 2)",
                params.bound, params.min_cells
            ),
        });
    }
    let mut rungs = Vec::new();
    let mut scheduled = 0usize;
    let mut k = 0usize;
    loop {
        let beta = params.alpha / 2.0 + k as f64 * params.alpha;
        if beta > 1.0 + 1e-12 || k >= 8 {
            break;
        }
        scheduled += 1;
        let eta = (params.alpha / 2.0) * libm::pow(params.alpha, k as f64);
        let nominal = libm::pow(16.0, -(k as f64 + 1.0));
        let floor = params.min_cells as f64 * params.coarse_h;
        let raw = nominal.max(floor);
        let effective = params.coarse_h * libm::ceil(raw / params.coarse_h - 1e-9);
        let truncation = params.truncation.min(effective / 4.0);
        match rung_seminorm(
            series,
            beta,
            eta,
            effective,
            effective,
            truncation,
            params.center,
            params.coarse_h,
            params.coarse_dt,
        ) {
            Ok((seminorm, step_count)) => rungs.push(LadderRung {
                k,
                beta,
                eta,
                nominal_radius: nominal,
                effective_radius: effective,
                truncation,
                seminorm,
                step_count,
                pass: seminorm <= params.bound,
            }),
            Err(CoreError::Unresolved { .. }) => break,
            Err(e) => return Err(e),
        }
        k += 1;
    }
    if rungs.is_empty() {
        return Err(CoreError::Unresolved {
            what: "bootstrap ladder",
            detail: "no rung fits the lattice above the truncation scale".into(),
        });
    }
    Ok(LadderReport {
        alpha: params.alpha,
        bound: params.bound,
        under_resolved: rungs.len() < scheduled,
        rungs,
    })
}

/// Holder seminorm of the lateral derivative of a trace.
#[derive(Debug, Clone)]
pub struct GradientHolderReport {
    /// Truncated Holder seminorm of the extrapolated derivative.
    pub seminorm: f64,
    /// Exponent used (half the configured decay exponent).
    pub exponent: f64,
    /// Worst relative disagreement between the two finest quotients.
    pub disagreement: f64,
    /// Set when the disagreement exceeds the 5% resolution guard.
    pub unresolved: bool,
    /// Number of sample pairs that entered the seminorm.
    pub pairs_used: usize,
}

/// Measures `[d_e trace]_{C^{alpha/2}}` over the cylinder
/// `B_radius(center) x (t_top - radius, t_top]`.
///
/// The derivative is the Richardson combination `(4 D_h - D_2h) / 3` of
/// centered difference quotients at the two finest lattice steps; if those
/// two quotients disagree by more than 5% of the derivative scale the
/// report is flagged unresolved.
pub fn gradient_holder(
    series: &TraceSeries,
    alpha: f64,
    center: f64,
    radius: f64,
    truncation: f64,
) -> Result<GradientHolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CoreError::Invalid {
            what: "gradient exponent",
            detail: format!("alpha = {alpha} must lie in (0, 1]"),
        });
    }
    let n = series.nx();
    if n < 8 {
        return Err(CoreError::Unresolved {
            what: "gradient lattice",
            detail: format!("{n} lateral nodes; need at least 8"),
        });
    }
    let h = series.grid().h();
    let t_top = *series.times().last().unwrap();

    let mut points = Vec::new();
    let mut deriv = Vec::new();
    let mut scale = 0.0f64;
    let mut worst_gap = 0.0f64;
    for (j, &t) in series.times().iter().enumerate() {
        if !(t > t_top - radius - 1e-12) {
            continue;
        }
        for i in 0..n {
            let dx = series.grid().min_image(series.grid().node(i) - center);
            if libm::fabs(dx) > radius + 1e-12 {
                continue;
            }
            let vm2 = series.value(j, (i + n - 2) % n);
            let vm1 = series.value(j, (i + n - 1) % n);
            let vp1 = series.value(j, (i + 1) % n);
            let vp2 = series.value(j, (i + 2) % n);
            let d1 = (vp1 - vm1) / (2.0 * h);
            let d2 = (vp2 - vm2) / (4.0 * h);
            let d = (4.0 * d1 - d2) / 3.0;
            let gap = libm::fabs(d1 - d2);
            if gap > worst_gap {
                worst_gap = gap;
            }
            let a = libm::fabs(d);
            if a > scale {
                scale = a;
            }
            points.push(ParabolicPoint::boundary(center + dx, t - t_top)?);
            deriv.push(d);
        }
    }
    if points.len() < 2 {
        return Err(CoreError::Unresolved {
            what: "gradient cylinder",
            detail: format!("radius {radius} captures {} sample(s)", points.len()),
        });
    }
    let disagreement = worst_gap / scale.max(1e-12);
    let report = trunc_holder_scalar(
        &points,
        &deriv,
        alpha / 2.0,
        truncation,
        Some(series.grid().len()),
    )?;
    Ok(GradientHolderReport {
        seminorm: report.value,
        exponent: alpha / 2.0,
        disagreement,
        unresolved: disagreement > 0.05,
        pairs_used: report.pairs_used,
    })
}

/// Largest snapshot-to-snapshot rate of change of a trace: the sup over
/// consecutive snapshots of `max_x |v(x, t_{j+1}) - v(x, t_j)| / dt`.
pub fn max_time_rate(series: &TraceSeries) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..series.nt() - 1 {
        let dt = series.times()[j + 1] - series.times()[j];
        for i in 0..series.nx() {
            let rate = libm::fabs(series.value(j + 1, i) - series.value(j, i)) / dt;
            if rate > worst {
                worst = rate;
            }
        }
    }
    worst
}

/// Measured ellipticity range of a trajectory: the min and max of the
/// interface speed over all snapshots.
pub fn ellipticity_bounds(traj: &Trajectory) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for snap in &traj.snapshots {
        for &s in &snap.speed {
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    (lo, hi)
}

/// Solution of the damped density ODE `r' + C r = c eps f(t)` from rest.
#[derive(Debug, Clone)]
pub struct BarrierOdeReport {
    /// Sample times over `(-3/4, 0]`.
    pub times: Vec<f64>,
    /// Closed-form solution at the sample times.
    pub values: Vec<f64>,
    /// Supremum of the solution.
    pub sup: f64,
    /// A-priori cap `c * eps` the solution must stay below.
    pub cap: f64,
    /// Barrier rate `(c / 32) * exp(-3 C / 4)`.
    pub theta: f64,
    /// Fraction of `(-3/4, -1/2]` where the density is 1.
    pub early_density: f64,
    /// Minimum of the solution over `[-1/2, 0]`.
    pub tail_min: f64,
    /// Lower barrier `4 * theta * eps` implied when the density
    /// hypothesis holds.
    pub tail_bound: f64,
    /// Whether the early density reaches 1/2.
    pub density_hypothesis: bool,
}

/// Piecewise-constant segments of a schedule clipped to `[lo, hi]`.
fn schedule_segments(f: &Schedule, lo: f64, hi: f64) -> Vec<(f64, f64, f64)> {
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(lo);
    for &b in f.breakpoints() {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut segs = Vec::new();
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            segs.push((w[0], w[1], f.value_at(0.5 * (w[0] + w[1]))));
        }
    }
    segs
}

/// Solves the damped density ODE in closed form.
///
/// The solution from rest at `t = -3/4` is
/// `r(t) = c eps * integral of f(s) exp(-C (t - s)) ds`, integrated
/// exactly over each piece of the 0/1 density schedule.  The report
/// carries the cap `c eps` (always respected: the kernel integral is at
/// most the window length 3/4), the rate `theta = (c/32) exp(-3C/4)`, and
/// the tail lower bound `4 theta eps` that the density hypothesis
/// (density at least 1/2 on `(-3/4, -1/2]`) forces on `[-1/2, 0]`.
pub fn harnack_barrier_ode(
    density: &Schedule,
    c: f64,
    big_c: f64,
    eps: f64,
    samples: usize,
) -> Result<BarrierOdeReport> {
    if !(c > 0.0 && big_c > 0.0 && eps > 0.0) {
        return Err(CoreError::Invalid {
            what: "barrier parameters",
            detail: format!("c = {c}, C = {big_c}, eps = {eps} must be positive"),
        });
    }
    if samples < 8 {
        return Err(CoreError::Invalid {
            what: "barrier samples",
            detail: format!("{samples} sample(s); need at least 8"),
        });
    }
    if density.start() > -0.75 + 1e-12 {
        return Err(CoreError::Invalid {
            what: "density schedule",
            detail: format!("must cover (-3/4, 0]; starts at {}", density.start()),
        });
    }
    let segs = schedule_segments(density, -0.75, 0.0);
    for &(s0, s1, v) in &segs {
        if v != 0.0 && v != 1.0 {
            return Err(CoreError::Invalid {
                what: "density schedule",
                detail: format!("value {v} on [{s0}, {s1}] is not 0/1"),
            });
        }
    }

    let r_at = |t: f64| -> f64 {
        let mut acc = 0.0;
        for &(s0, s1, v) in &segs {
            if v == 0.0 || s0 >= t {
                continue;
            }
            let hi = s1.min(t);
            acc += (libm::exp(-big_c * (t - hi)) - libm::exp(-big_c * (t - s0))) / big_c;
        }
        c * eps * acc
    };

    let mut times = Vec::with_capacity(samples + 1);
    let mut values = Vec::with_capacity(samples + 1);
    let mut sup = 0.0f64;
    let mut tail_min = f64::INFINITY;
    for i in 0..=samples {
        let t = -0.75 + 0.75 * i as f64 / samples as f64;
        let r = r_at(t);
        if r > sup {
            sup = r;
        }
        if t >= -0.5 - 1e-12 && r < tail_min {
            tail_min = r;
        }
        times.push(t);
        values.push(r);
    }

    let mut early = 0.0;
    for &(s0, s1, v) in &segs {
        if v == 1.0 {
            let lo = s0.max(-0.75);
            let hi = s1.min(-0.5);
            if hi > lo {
                early += hi - lo;
            }
        }
    }
    let early_density = early / 0.25;
    let theta = (c / 32.0) * libm::exp(-0.75 * big_c);

    Ok(BarrierOdeReport {
        times,
        values,
        sup,
        cap: c * eps,
        theta,
        early_density,
        tail_min,
        tail_bound: 4.0 * theta * eps,
        density_hypothesis: early_density >= 0.5 - 1e-12,
    })
}
