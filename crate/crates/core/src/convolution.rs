//! Parabolic sup/inf convolutions of boundary traces.
//!
//! Given a space-time trace `v(x, t)` on a periodic spatial lattice and a
//! uniform time lattice, the sup-convolution at penalty scales `(xi, tau)`
//! and flatness constant `N` is
//!
//! `v^{xi,tau}(x,t) = max over |y| < sqrt(xi), |s| < sqrt(tau) of
//!   v(x+y, t+s) - 2N (y^2/xi + s^2/tau)`,
//!
//! evaluated exhaustively over lattice offsets; the inf-convolution is the
//! mirror with `+` penalty and a minimum.  The window shrinks the valid
//! time range, which the output reports.  [`check_regularization`] runs
//! the structural battery on the result: band preservation, dual-point
//! window bounds, the global touching-paraboloid minorization, per-time
//! Lipschitz control, the two-sided sandwich, and lattice-exact
//! semiconvexity.  Every failed item carries a witness node.
//!
//! The exhaustive scan is deliberate: window sizes at desk scale keep the
//! cost at `O(nodes x window)`, and exactness makes the battery its own
//! oracle.  A fast Legendre-transform path would be an optimization only,
//! to be validated against the scan.

use crate::analysis::TraceSeries;
use crate::error::{CoreError, Result};
use crate::grid::PeriodicGrid1D;
use crate::schedule::Schedule;
use alloc::format;
use alloc::vec::Vec;

/// Penalty scales and flatness data for a convolution pass.
#[derive(Debug, Clone)]
pub struct ConvolutionParams {
    /// Spatial penalty scale; the spatial window is `|y| < sqrt(xi)`.
    pub xi: f64,
    /// Temporal penalty scale; the temporal window is `|s| < sqrt(tau)`.
    pub tau: f64,
    /// Flatness constant `N` multiplying the penalty.
    pub flatness: f64,
    /// Flatness parameter of the underlying run; `eps * N` must lie in
    /// `(0, 1)`.
    pub eps: f64,
    /// When set, the trace is convolved in a frame that does not travel
    /// with the planar front: the drift `A(t)/eps` is added to the trace
    /// before convolving (`A` the accumulated influx).
    pub variable_slope: bool,
}

impl ConvolutionParams {
    /// Validates scales: all positive, `eps * flatness` in `(0, 1)`.
    pub fn new(xi: f64, tau: f64, flatness: f64, eps: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite() && tau > 0.0 && tau.is_finite()) {
            return Err(CoreError::Invalid {
                what: "penalty scales",
                detail: format!("xi = {xi}, tau = {tau} must be positive and finite"),
            });
        }
        if !(flatness > 0.0 && flatness.is_finite() && eps > 0.0 && eps.is_finite()) {
            return Err(CoreError::Invalid {
                what: "flatness data",
                detail: format!("N = {flatness}, eps = {eps} must be positive and finite"),
            });
        }
        let product = eps * flatness;
        if !(product > 0.0 && product < 1.0) {
            return Err(CoreError::Invalid {
                what: "flatness regime",
                detail: format!("eps * N = {product} must lie in (0, 1)"),
            });
        }
        Ok(ConvolutionParams {
            xi,
            tau,
            flatness,
            eps,
            variable_slope: false,
        })
    }

    /// Switches on the non-traveling-frame drift.
    pub fn with_variable_slope(mut self) -> Self {
        self.variable_slope = true;
        self
    }
}

/// Where the extremum of one output node was attained.
#[derive(Debug, Clone, Copy)]
pub struct DualPointRecord {
    /// Spatial index of the output node on the trace grid.
    pub x_index: usize,
    /// Time index of the output node on the input time lattice.
    pub t_index: usize,
    /// Maximizer spatial offset `y_0` (signed, physical units).
    pub offset_x: f64,
    /// Maximizer temporal offset `s_0` (signed, physical units).
    pub offset_t: f64,
    /// Achieved convolved value.
    pub value: f64,
}

/// Output of a convolution pass: the field on the time-shrunken region
/// plus one dual-point record per node.
#[derive(Debug, Clone)]
pub struct ConvolvedField {
    grid: PeriodicGrid1D,
    times: Vec<f64>,
    t_first: usize,
    values: Vec<f64>,
    records: Vec<DualPointRecord>,
    window_x_steps: usize,
    window_t_steps: usize,
}

impl ConvolvedField {
    /// Spatial grid shared with the input trace.
    pub fn grid(&self) -> &PeriodicGrid1D {
        &self.grid
    }

    /// Output snapshot times (a contiguous sub-range of the input times).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Index into the input time lattice of the first output row.
    pub fn t_first(&self) -> usize {
        self.t_first
    }

    /// Number of output rows.
    pub fn nt(&self) -> usize {
        self.times.len()
    }

    /// Convolved value at output row `j`, node `i`.
    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    /// Output row `j` as a slice.
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[j * n..(j + 1) * n]
    }

    /// One dual-point record per output node, row-major.
    pub fn records(&self) -> &[DualPointRecord] {
        &self.records
    }

    /// Half-window sizes in lattice steps `(spatial, temporal)`.
    pub fn window_steps(&self) -> (usize, usize) {
        (self.window_x_steps, self.window_t_steps)
    }

    /// Rebuilds a trace series from the convolved field (for chaining a
    /// second pass).
    pub fn to_series(&self, eps: f64) -> Result<TraceSeries> {
        TraceSeries::new(self.grid.clone(), self.times.clone(), self.values.clone(), eps)
    }
}

/// Window geometry shared by both convolution directions.
struct WindowPlan {
    drifted: Vec<f64>,
    dt: f64,
    m_x: usize,
    m_t: usize,
}

fn plan_window(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
) -> Result<WindowPlan> {
    let times = series.times();
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        let step = w[1] - w[0];
        if libm::fabs(step - dt) > 1e-9 * dt.max(1e-300) {
            return Err(CoreError::Invalid {
                what: "trace time lattice",
                detail: format!("non-uniform spacing {step} vs {dt}"),
            });
        }
    }
    let h = series.grid().h();
    let m_x = libm::floor(libm::sqrt(params.xi) / h - 1e-9) as usize;
    let m_t = libm::floor(libm::sqrt(params.tau) / dt - 1e-9) as usize;
    if m_x < 2 || m_t < 2 {
        return Err(CoreError::Invalid {
            what: "convolution window",
            detail: format!(
                "windows must span at least 2 lattice cells; got {m_x} spatial, {m_t} temporal"
            ),
        });
    }
    if 2 * m_x > series.nx() {
        return Err(CoreError::Invalid {
            what: "convolution window",
            detail: format!(
                "spatial window {m_x} steps exceeds half the period ({} nodes)",
                series.nx()
            ),
        });
    }
    if 2 * m_t + 1 > series.nt() {
        return Err(CoreError::Invalid {
            what: "convolution window",
            detail: format!(
                "temporal window {m_t} steps leaves no valid rows out of {}",
                series.nt()
            ),
        });
    }

    let mut drifted = Vec::with_capacity(series.nt() * series.nx());
    match (params.variable_slope, influx) {
        (false, None) => {
            for j in 0..series.nt() {
                drifted.extend_from_slice(series.row(j));
            }
        }
        (true, Some(schedule)) => {
            let t0 = times[0];
            for (j, t) in times.iter().enumerate() {
                let drift = schedule.integral(t0, *t) / series.eps();
                for v in series.row(j) {
                    drifted.push(v + drift);
                }
            }
        }
        (true, None) => {
            return Err(CoreError::Invalid {
                what: "convolution drift",
                detail: "variable-slope convolution needs the influx schedule".into(),
            });
        }
        (false, Some(_)) => {
            return Err(CoreError::Invalid {
                what: "convolution drift",
                detail: "influx schedule supplied without the variable-slope flag".into(),
            });
        }
    }
    Ok(WindowPlan { drifted, dt, m_x, m_t })
}

fn convolve(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
    upper: bool,
) -> Result<ConvolvedField> {
    let plan = plan_window(series, params, influx)?;
    let nx = series.nx();
    let nt = series.nt();
    let h = series.grid().h();
    let n_const = params.flatness;
    let sign = if upper { 1.0 } else { -1.0 };

    let rows = nt - 2 * plan.m_t;
    let mut values = Vec::with_capacity(rows * nx);
    let mut records = Vec::with_capacity(rows * nx);
    for j in plan.m_t..nt - plan.m_t {
        for i in 0..nx {
            let mut best = f64::NEG_INFINITY;
            let mut best_off = (0i64, 0i64);
            for dj in -(plan.m_t as i64)..=plan.m_t as i64 {
                let s = dj as f64 * plan.dt;
                let t_pen = s * s / params.tau;
                let row = &plan.drifted
                    [((j as i64 + dj) as usize) * nx..((j as i64 + dj) as usize + 1) * nx];
                for di in -(plan.m_x as i64)..=plan.m_x as i64 {
                    let y = di as f64 * h;
                    let penalty = 2.0 * n_const * (y * y / params.xi + t_pen);
                    let ii = (i as i64 + di).rem_euclid(nx as i64) as usize;
                    let candidate = sign * row[ii] - penalty;
                    if candidate > best {
                        best = candidate;
                        best_off = (di, dj);
                    }
                }
            }
            values.push(sign * best);
            records.push(DualPointRecord {
                x_index: i,
                t_index: j,
                offset_x: best_off.0 as f64 * h,
                offset_t: best_off.1 as f64 * plan.dt,
                value: sign * best,
            });
        }
    }
    Ok(ConvolvedField {
        grid: series.grid().clone(),
        times: series.times()[plan.m_t..nt - plan.m_t].to_vec(),
        t_first: plan.m_t,
        values,
        records,
        window_x_steps: plan.m_x,
        window_t_steps: plan.m_t,
    })
}

/// Sup-convolution of the trace: exhaustive window maximum of
/// `v(x+y, t+s) - 2N (y^2/xi + s^2/tau)` per output node, with the
/// argmax recorded.  Pass the influx schedule iff
/// [`ConvolutionParams::variable_slope`] is set; the drift `A(t)/eps`
/// (accumulated influx over the trace's own `eps`) is then added to the
/// trace first.  The output time range shrinks by the temporal window on
/// both ends and reports the shrink via [`ConvolvedField::t_first`].
pub fn sup_conv(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
) -> Result<ConvolvedField> {
    convolve(series, params, influx, true)
}

/// Inf-convolution: mirror of [`sup_conv`] with `+` penalty and the
/// window minimum; satisfies `inf_conv(-v) = -sup_conv(v)` exactly.
pub fn inf_conv(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
) -> Result<ConvolvedField> {
    convolve(series, params, influx, false)
}

/// One failed battery item: output row, node, and the violation size.
pub type WitnessNode = (usize, usize, f64);

/// Structural battery over a sup-convolved trace.
#[derive(Debug, Clone)]
pub struct RegularizationReport {
    /// Input value hull `(min, max)`.
    pub band_in: (f64, f64),
    /// Output value hull `(min, max)`.
    pub band_out: (f64, f64),
    /// Output hull inside the input hull and `v <= v^{xi,tau}` pointwise.
    pub band_ok: bool,
    pub band_witness: Option<WitnessNode>,
    /// All dual offsets strictly inside the stated windows.
    pub windows_ok: bool,
    /// Largest recorded `|y_0|` and `|s_0|`.
    pub max_offset_x: f64,
    pub max_offset_t: f64,
    /// Every touching paraboloid minorizes the output everywhere.
    pub touching_ok: bool,
    pub touching_witness: Option<WitnessNode>,
    /// Worst per-time lattice Lipschitz constant of the output.
    pub lipschitz_measured: f64,
    /// `2N/sqrt(xi)` plus one lattice step of paraboloid slope.
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    pub lipschitz_witness: Option<WitnessNode>,
    /// `v <= v^{xi,tau} <= windowed sup of v` pointwise.
    pub sandwich_ok: bool,
    pub sandwich_witness: Option<WitnessNode>,
    /// Second differences along x bounded below by `-4N h^2/xi`.
    pub semiconvexity_ok: bool,
    /// Worst slack `delta^2 + 4N h^2/xi` (nonnegative when ok).
    pub semiconvexity_worst: f64,
    pub semiconvexity_witness: Option<WitnessNode>,
    /// Conjunction of all items.
    pub ok: bool,
}

/// Runs the regularization battery on `series`: convolves with `params`
/// and checks band preservation, dual windows, the global
/// touching-paraboloid minorization, per-time Lipschitz control with the
/// `2N/sqrt(xi)` bound, the two-sided sandwich, and lattice-exact
/// semiconvexity `delta_h^2 >= -4N h^2/xi`.
///
/// The trace must respect the recorded flatness (`sup |v| < N`); the
/// Lipschitz bound is a theorem for traces of flat solutions, so the
/// report carries the measured constant and a witness for synthetic
/// inputs that breach it.
pub fn check_regularization(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
) -> Result<(RegularizationReport, ConvolvedField)> {
    if series.sup_norm() >= params.flatness {
        return Err(CoreError::Invalid {
            what: "flatness record",
            detail: format!(
                "trace sup {} is not below the recorded constant {}",
                series.sup_norm(),
                params.flatness
            ),
        });
    }
    let field = convolve(series, params, influx, true)?;
    let nx = series.nx();
    let grid = series.grid();
    let h = grid.h();
    let n_const = params.flatness;
    let (m_x, m_t) = field.window_steps();
    let dt = field.times()[1] - field.times()[0];

    // The battery compares against the (possibly drifted) input rows.
    let plan = plan_window(series, params, influx)?;
    let input_at = |j: usize, i: usize| plan.drifted[j * nx + i];

    let mut band_in = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &plan.drifted {
        band_in.0 = band_in.0.min(*v);
        band_in.1 = band_in.1.max(*v);
    }
    let mut band_out = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..field.nt() {
        for i in 0..nx {
            let w = field.value(j, i);
            band_out.0 = band_out.0.min(w);
            band_out.1 = band_out.1.max(w);
        }
    }
    let tol = 1e-12 * band_in.1.abs().max(band_in.0.abs()).max(1.0);
    let mut band_ok = band_out.0 >= band_in.0 - tol && band_out.1 <= band_in.1 + tol;
    let mut band_witness = None;
    for j in 0..field.nt() {
        for i in 0..nx {
            let lower = input_at(field.t_first() + j, i);
            let w = field.value(j, i);
            if w < lower - tol {
                band_ok = false;
                band_witness = Some((j, i, lower - w));
            }
        }
    }

    let sqrt_xi = libm::sqrt(params.xi);
    let sqrt_tau = libm::sqrt(params.tau);
    let mut max_offset_x = 0.0f64;
    let mut max_offset_t = 0.0f64;
    for r in field.records() {
        max_offset_x = max_offset_x.max(libm::fabs(r.offset_x));
        max_offset_t = max_offset_t.max(libm::fabs(r.offset_t));
    }
    let windows_ok = max_offset_x < sqrt_xi && max_offset_t < sqrt_tau;

    // Global minorization by each node's touching paraboloid, with
    // periodic (nearest-image) spatial distance.
    let mut touching_ok = true;
    let mut touching_witness: Option<WitnessNode> = None;
    for r in field.records() {
        let dual_x = grid.node(r.x_index) + r.offset_x;
        let dual_t = series.times()[r.t_index] + r.offset_t;
        let dual_i = ((r.x_index as i64
            + libm::round(r.offset_x / h) as i64)
            .rem_euclid(nx as i64)) as usize;
        let dual_j = (r.t_index as i64 + libm::round(r.offset_t / dt) as i64) as usize;
        let peak = input_at(dual_j, dual_i);
        for j in 0..field.nt() {
            let t = field.times()[j];
            let spen = (t - dual_t) * (t - dual_t) / params.tau;
            for i in 0..nx {
                let dx = grid.min_image(grid.node(i) - dual_x);
                let parab = peak - 2.0 * n_const * (dx * dx / params.xi + spen);
                let w = field.value(j, i);
                if parab > w + tol {
                    touching_ok = false;
                    match touching_witness {
                        Some((_, _, worst)) if worst >= parab - w => {}
                        _ => touching_witness = Some((j, i, parab - w)),
                    }
                }
            }
        }
    }

    let lipschitz_bound = 2.0 * n_const / sqrt_xi + 4.0 * n_const * h / params.xi;
    let mut lipschitz_measured = 0.0f64;
    let mut lipschitz_witness = None;
    for j in 0..field.nt() {
        let row = field.row(j);
        for i in 0..nx {
            let slope = libm::fabs(row[(i + 1) % nx] - row[i]) / h;
            if slope > lipschitz_measured {
                lipschitz_measured = slope;
                lipschitz_witness = Some((j, i, slope));
            }
        }
    }
    let lipschitz_ok = lipschitz_measured <= lipschitz_bound;
    if lipschitz_ok {
        lipschitz_witness = None;
    }

    let mut sandwich_ok = true;
    let mut sandwich_witness: Option<WitnessNode> = None;
    for j in 0..field.nt() {
        let jj = field.t_first() + j;
        for i in 0..nx {
            let w = field.value(j, i);
            let mut windowed = f64::NEG_INFINITY;
            for dj in -(m_t as i64)..=m_t as i64 {
                let row_j = (jj as i64 + dj) as usize;
                for di in -(m_x as i64)..=m_x as i64 {
                    let ii = (i as i64 + di).rem_euclid(nx as i64) as usize;
                    windowed = windowed.max(input_at(row_j, ii));
                }
            }
            let lower = input_at(jj, i);
            if w < lower - tol || w > windowed + tol {
                sandwich_ok = false;
                let gap = (lower - w).max(w - windowed);
                match sandwich_witness {
                    Some((_, _, worst)) if worst >= gap => {}
                    _ => sandwich_witness = Some((j, i, gap)),
                }
            }
        }
    }

    let semi_floor = -4.0 * n_const * h * h / params.xi;
    let mut semiconvexity_worst = f64::INFINITY;
    let mut semiconvexity_witness = None;
    for j in 0..field.nt() {
        let row = field.row(j);
        for i in 0..nx {
            let dd = row[(i + 1) % nx] + row[(i + nx - 1) % nx] - 2.0 * row[i];
            let slack = dd - semi_floor;
            if slack < semiconvexity_worst {
                semiconvexity_worst = slack;
                semiconvexity_witness = Some((j, i, slack));
            }
        }
    }
    let semiconvexity_ok = semiconvexity_worst >= -tol;
    if semiconvexity_ok {
        semiconvexity_witness = None;
    }

    let ok = band_ok && windows_ok && touching_ok && lipschitz_ok && sandwich_ok
        && semiconvexity_ok;
    Ok((
        RegularizationReport {
            band_in,
            band_out,
            band_ok,
            band_witness,
            windows_ok,
            max_offset_x,
            max_offset_t,
            touching_ok,
            touching_witness,
            lipschitz_measured,
            lipschitz_bound,
            lipschitz_ok,
            lipschitz_witness,
            sandwich_ok,
            sandwich_witness,
            semiconvexity_ok,
            semiconvexity_worst,
            semiconvexity_witness,
            ok,
        },
        field,
    ))
}

/// Result of a temporal-scale sweep at fixed `xi`.
#[derive(Debug, Clone)]
pub struct TauSweepReport {
    /// Sweep values, as given (strictly decreasing required).
    pub taus: Vec<f64>,
    /// Worst pointwise increase between consecutive sweep steps
    /// (monotone decrease means this stays at or below zero slack).
    pub worst_increase: f64,
    /// Pointwise monotone decrease held across the sweep.
    pub monotone_ok: bool,
    /// Sup gap to the pure spatial convolution per sweep step.
    pub gaps_to_spatial: Vec<f64>,
}

/// Sweeps the temporal penalty scale downward and checks that the
/// sup-convolution decreases pointwise toward the pure spatial
/// convolution: shrinking `tau` both sharpens the temporal penalty and
/// narrows the window, so every candidate value drops.  The spatial-only
/// reference keeps `s = 0` candidates, hence bounds every sweep step from
/// below; the gap decays linearly in `tau` for time-Lipschitz traces.
pub fn tau_monotonicity(
    series: &TraceSeries,
    params: &ConvolutionParams,
    influx: Option<&Schedule>,
    taus: &[f64],
) -> Result<TauSweepReport> {
    if taus.len() < 2 || taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CoreError::Invalid {
            what: "tau sweep",
            detail: "need at least two strictly decreasing scales".into(),
        });
    }
    let mut fields = Vec::with_capacity(taus.len());
    for tau in taus {
        let mut p = params.clone();
        p.tau = *tau;
        fields.push(convolve(series, &p, influx, true)?);
    }
    // Pure spatial reference: temporal window collapsed to s = 0.
    let plan = plan_window(series, params, influx)?;
    let nx = series.nx();
    let h = series.grid().h();
    let spatial = |j: usize, i: usize| -> f64 {
        let row = &plan.drifted[j * nx..(j + 1) * nx];
        let mut best = f64::NEG_INFINITY;
        for di in -(plan.m_x as i64)..=plan.m_x as i64 {
            let y = di as f64 * h;
            let ii = (i as i64 + di).rem_euclid(nx as i64) as usize;
            best = best.max(row[ii] - 2.0 * params.flatness * y * y / params.xi);
        }
        best
    };

    let mut worst_increase = f64::NEG_INFINITY;
    for pair in fields.windows(2) {
        let (wide, narrow) = (&pair[0], &pair[1]);
        // Compare on the wide field's rows (the larger shrink).
        for j in 0..wide.nt() {
            let jn = wide.t_first() + j - narrow.t_first();
            for i in 0..nx {
                let increase = narrow.value(jn, i) - wide.value(j, i);
                worst_increase = worst_increase.max(increase);
            }
        }
    }
    let mut gaps = Vec::with_capacity(fields.len());
    for f in &fields {
        let mut gap = 0.0f64;
        for j in 0..f.nt() {
            for i in 0..nx {
                let g = f.value(j, i) - spatial(f.t_first() + j, i);
                gap = gap.max(g);
            }
        }
        gaps.push(gap);
    }
    Ok(TauSweepReport {
        taus: taus.to_vec(),
        worst_increase,
        monotone_ok: worst_increase <= 1e-12,
        gaps_to_spatial: gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series_from<F: Fn(f64, f64) -> f64>(
        nx: usize,
        length: f64,
        nt: usize,
        dt: f64,
        eps: f64,
        f: F,
    ) -> TraceSeries {
        let grid = PeriodicGrid1D::new(nx, length).unwrap();
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * dt).collect();
        let mut values = Vec::with_capacity(nx * nt);
        for t in &times {
            for i in 0..nx {
                values.push(f(grid.node(i), *t));
            }
        }
        TraceSeries::new(grid, times, values, eps).unwrap()
    }

    fn base_params() -> ConvolutionParams {
        ConvolutionParams::new(0.25, 0.04, 2.0, 0.1).unwrap()
    }

    #[test]
    fn params_reject_bad_regimes() {
        assert!(ConvolutionParams::new(0.0, 0.04, 2.0, 0.1).is_err());
        assert!(ConvolutionParams::new(0.25, 0.04, 2.0, 0.6).is_err()); // eps*N = 1.2
        assert!(ConvolutionParams::new(0.25, -0.04, 2.0, 0.1).is_err());
    }

    #[test]
    fn constant_trace_is_a_fixed_point_with_origin_dual() {
        let s = series_from(32, core::f64::consts::TAU, 12, 0.05, 0.1, |_, _| 0.7);
        let field = sup_conv(&s, &base_params(), None).unwrap();
        for j in 0..field.nt() {
            for i in 0..32 {
                assert!((field.value(j, i) - 0.7).abs() < 1e-15);
            }
        }
        for r in field.records() {
            assert_eq!(r.offset_x, 0.0);
            assert_eq!(r.offset_t, 0.0);
        }
        let infc = inf_conv(&s, &base_params(), None).unwrap();
        for j in 0..infc.nt() {
            for i in 0..32 {
                assert!((infc.value(j, i) - 0.7).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cone_value_matches_the_closed_form_on_an_exact_lattice() {
        // Distance cone on a period-2 lattice with h = 1/128 (exact
        // binary): the one-sided maximum of |y| - (2N/xi) y^2 sits at
        // |y| = xi/(4N) = 6h = 0.046875, with value xi/(8N) = 0.0234375;
        // every quantity is dyadic, so the lattice scan reproduces the
        // closed form to the last bit.
        let params = ConvolutionParams::new(0.375, 0.04, 2.0, 0.1).unwrap();
        let s = series_from(256, 2.0, 9, 0.05, 0.1, |x, _| {
            let grid = PeriodicGrid1D::new(256, 2.0).unwrap();
            libm::fabs(grid.min_image(x))
        });
        let field = sup_conv(&s, &params, None).unwrap();
        let j_mid = field.nt() / 2;
        let w0 = field.value(j_mid, 0);
        assert!(
            (w0 - 0.0234375).abs() < 1e-15,
            "cone sup-convolution at 0: {w0} vs 0.0234375"
        );
        let rec = &field.records()[j_mid * 256];
        assert!((libm::fabs(rec.offset_x) - 0.046875).abs() < 1e-15);
        assert_eq!(rec.offset_t, 0.0);

        // Mirrored cone through the inf-convolution.
        let neg = series_from(256, 2.0, 9, 0.05, 0.1, |x, _| {
            let grid = PeriodicGrid1D::new(256, 2.0).unwrap();
            -libm::fabs(grid.min_image(x))
        });
        let low = inf_conv(&neg, &params, None).unwrap();
        assert!((low.value(j_mid, 0) + 0.0234375).abs() < 1e-15);
    }

    #[test]
    fn inf_conv_is_the_dual_of_sup_conv_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(211);
        let grid = PeriodicGrid1D::new(64, core::f64::consts::TAU).unwrap();
        for _ in 0..100 {
            let nt = 12usize;
            let times: Vec<f64> = (0..nt).map(|j| j as f64 * 0.05).collect();
            let values: Vec<f64> =
                (0..nt * 64).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let neg: Vec<f64> = values.iter().map(|v| -v).collect();
            let s = TraceSeries::new(grid.clone(), times.clone(), values, 0.1).unwrap();
            let sn = TraceSeries::new(grid.clone(), times.clone(), neg, 0.1).unwrap();
            let hi = sup_conv(&s, &base_params(), None).unwrap();
            let lo = inf_conv(&sn, &base_params(), None).unwrap();
            for j in 0..hi.nt() {
                for i in 0..64 {
                    assert_eq!(lo.value(j, i), -hi.value(j, i));
                }
            }
        }
    }

    #[test]
    fn sup_conv_is_monotone_and_commutes_with_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(6_700_417);
        let grid = PeriodicGrid1D::new(32, core::f64::consts::TAU).unwrap();
        let nt = 11usize;
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * 0.05).collect();
        for _ in 0..20 {
            let a: Vec<f64> = (0..nt * 32).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let bump: Vec<f64> = (0..nt * 32).map(|_| rng.gen_range(0.0..0.4)).collect();
            let b: Vec<f64> = a.iter().zip(&bump).map(|(x, d)| x + d).collect();
            let shift: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
            let sa = TraceSeries::new(grid.clone(), times.clone(), a, 0.1).unwrap();
            let sb = TraceSeries::new(grid.clone(), times.clone(), b, 0.1).unwrap();
            let sc = TraceSeries::new(grid.clone(), times.clone(), shift, 0.1).unwrap();
            let fa = sup_conv(&sa, &base_params(), None).unwrap();
            let fb = sup_conv(&sb, &base_params(), None).unwrap();
            let fc = sup_conv(&sc, &base_params(), None).unwrap();
            for j in 0..fa.nt() {
                for i in 0..32 {
                    assert!(fa.value(j, i) <= fb.value(j, i) + 1e-15);
                    assert!((fc.value(j, i) - (fa.value(j, i) + 0.3)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn double_application_respects_the_increment_bound() {
        // Second pass obeys the same sandwich as the first: 0 <= S(w) - w
        // <= windowed sup of w minus w, checked on the doubly shrunk rows.
        let s = series_from(64, core::f64::consts::TAU, 20, 0.05, 0.1, |x, t| {
            0.5 * libm::sin(x) * libm::exp(-0.3 * t)
        });
        let params = base_params();
        let once = sup_conv(&s, &params, None).unwrap();
        let once_series = once.to_series(0.1).unwrap();
        let twice = sup_conv(&once_series, &params, None).unwrap();
        let (m_x, m_t) = twice.window_steps();
        for j in 0..twice.nt() {
            let jj = twice.t_first() + j;
            for i in 0..64 {
                let w1 = once.value(jj, i);
                let w2 = twice.value(j, i);
                assert!(w2 >= w1 - 1e-15);
                let mut windowed = f64::NEG_INFINITY;
                for dj in -(m_t as i64)..=m_t as i64 {
                    for di in -(m_x as i64)..=m_x as i64 {
                        let ii = (i as i64 + di).rem_euclid(64) as usize;
                        windowed = windowed.max(once.value((jj as i64 + dj) as usize, ii));
                    }
                }
                assert!(w2 <= windowed + 1e-15);
            }
        }
    }

    #[test]
    fn battery_passes_on_planar_and_smooth_random_fields() {
        // Planar: all items with zero slack.
        let planar = series_from(64, core::f64::consts::TAU, 16, 0.05, 0.1, |_, _| 0.0);
        let (report, _) = check_regularization(&planar, &base_params(), None).unwrap();
        assert!(report.ok, "{report:?}");
        assert_eq!(report.lipschitz_measured, 0.0);

        // 100 random flat fields with gentle slopes.
        let mut rng = ChaCha8Rng::seed_from_u64(514_229);
        let grid = PeriodicGrid1D::new(64, core::f64::consts::TAU).unwrap();
        let nt = 16usize;
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * 0.05).collect();
        for trial in 0..100 {
            let a1: f64 = rng.gen_range(-0.4..0.4);
            let a2: f64 = rng.gen_range(-0.25..0.25);
            let phase: f64 = rng.gen_range(0.0..6.28);
            let sigma: f64 = rng.gen_range(-1.0..0.0);
            let mut values = Vec::with_capacity(nt * 48);
            for t in &times {
                for i in 0..64 {
                    let x = grid.node(i);
                    values.push(
                        libm::exp(sigma * t)
                            * (a1 * libm::sin(x + phase) + a2 * libm::cos(2.0 * x)),
                    );
                }
            }
            let s = TraceSeries::new(grid.clone(), times.clone(), values, 0.1).unwrap();
            let (report, _) = check_regularization(&s, &base_params(), None).unwrap();
            assert!(report.ok, "trial {trial}: {report:?}");
        }
    }

    #[test]
    fn battery_reports_a_lipschitz_witness_on_a_spike_trace() {
        // A single-node spike regularizes into a paraboloid cap whose edge
        // slope approaches 4 sqrt(N(N-1))/sqrt(xi), above the flat-run
        // bound 2N/sqrt(xi): the battery must flag it with a witness, and
        // the structural items (band, windows, touching, semiconvexity)
        // must still pass.
        let grid = PeriodicGrid1D::new(128, 2.0).unwrap();
        let nt = 9usize;
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * 0.05).collect();
        let mut values = vec![-0.9f64; nt * 128];
        for j in 0..nt {
            values[j * 128] = 0.9;
        }
        let s = TraceSeries::new(grid, times, values, 0.1).unwrap();
        let params = ConvolutionParams::new(0.09, 0.04, 1.0, 0.5).unwrap();
        let (report, _) = check_regularization(&s, &params, None).unwrap();
        assert!(!report.lipschitz_ok);
        assert!(report.lipschitz_witness.is_some());
        assert!(report.band_ok && report.windows_ok && report.touching_ok);
        assert!(report.semiconvexity_ok, "worst {}", report.semiconvexity_worst);
        assert!(!report.ok);
    }

    #[test]
    fn tau_sweep_decreases_pointwise_toward_the_spatial_convolution() {
        // Time-Lipschitz trace: gap to the pure spatial convolution decays
        // like L^2 tau / (8N) with lattice slack.
        let rate = 0.8f64;
        let s = series_from(64, core::f64::consts::TAU, 48, 0.0125, 0.1, |x, t| {
            0.5 * libm::sin(x) + rate * 0.5 * t
        });
        let params = ConvolutionParams::new(0.25, 0.04, 2.0, 0.1).unwrap();
        let taus = [0.04, 0.01, 0.0025];
        let report = tau_monotonicity(&s, &params, None, &taus).unwrap();
        assert!(report.monotone_ok, "worst increase {}", report.worst_increase);
        let lip_t = rate * 0.5;
        for (tau, gap) in report.taus.iter().zip(&report.gaps_to_spatial) {
            let bound = lip_t * lip_t * tau / (8.0 * params.flatness) + 2.0 * lip_t * 0.0125;
            assert!(*gap <= bound + 1e-12, "tau {tau}: gap {gap} over {bound}");
        }
        assert!(report.gaps_to_spatial[2] <= report.gaps_to_spatial[0] + 1e-15);
    }

    #[test]
    fn variable_slope_adds_the_influx_drift() {
        // Constant trace, constant influx a = 2, eps = 0.4: the drifted
        // trace is 5t, and the temporal penalty trade-off tops out at
        // s* = c tau/(4N) = 0.025 (two lattice steps exactly), adding
        // c^2 tau/(8N) = 1/16 over the drift itself.
        let s = series_from(64, core::f64::consts::TAU, 33, 0.0125, 0.4, |_, _| 0.0);
        let schedule = Schedule::constant(2.0).unwrap();
        let params = ConvolutionParams::new(0.25, 0.04, 2.0, 0.4)
            .unwrap()
            .with_variable_slope();
        let field = sup_conv(&s, &params, Some(&schedule)).unwrap();
        for j in 0..field.nt() {
            let t = field.times()[j];
            let expected = 5.0 * t + 1.0 / 16.0;
            for i in 0..64 {
                assert!(
                    (field.value(j, i) - expected).abs() < 1e-12,
                    "t = {t}: {} vs {expected}",
                    field.value(j, i)
                );
            }
        }
        // Flag/argument mismatches are rejected.
        assert!(sup_conv(&s, &params, None).is_err());
        let plain = ConvolutionParams::new(0.25, 0.04, 2.0, 0.4).unwrap();
        assert!(sup_conv(&s, &plain, Some(&schedule)).is_err());
    }

    #[test]
    fn windows_under_two_cells_are_rejected() {
        let s = series_from(16, core::f64::consts::TAU, 12, 0.05, 0.1, |_, _| 0.0);
        // sqrt(xi) = 0.5 against h = 0.39: only one step fits.
        let params = ConvolutionParams::new(0.25, 0.04, 2.0, 0.1).unwrap();
        let err = sup_conv(&s, &params, None).unwrap_err();
        assert!(matches!(err, CoreError::Invalid { .. }));
    }

    #[test]
    fn flatness_precondition_is_enforced() {
        let s = series_from(64, core::f64::consts::TAU, 12, 0.05, 0.1, |x, _| {
            3.0 * libm::sin(x)
        });
        let err = check_regularization(&s, &base_params(), None).unwrap_err();
        assert!(matches!(err, CoreError::Invalid { .. }));
    }
}
