//! Front evolution for the one-phase injection flow.
//!
//! The interface is a periodic graph `x_n = gamma(x', t)` over a flat bottom
//! at depth `-H` through which fluid enters at the (piecewise-constant in
//! time) rate `a(t)`.  Each step solves the mapped-strip pressure problem
//! (zero on the interface, influx `a` below), reads the interface speed
//! `|Du|`, and advances the graph by the vertical front law
//!
//! ```text
//! d gamma / dt = sqrt(1 + gamma'^2) |Du|
//! ```
//!
//! with explicit Euler in time.  Planar fronts ride the exact planar
//! pressure profile, so they advance by exactly `integral of a` up to solver
//! tolerance; wavy fronts relax toward planar at mode-dependent rates that
//! the dispersion oracle in this module predicts independently.

use crate::elliptic::{Mapping, SolveStats};
use crate::error::{CoreError, Result};
use crate::grid::StripGrid;
use crate::schedule::Schedule;
use crate::spectral::mode_amplitude;
use alloc::format;
use alloc::vec::Vec;

/// Safety factor applied to the explicit stability bound for the fastest
/// resolvable mode.
const DT_SAFETY: f64 = 0.25;

/// Interface snapshot: heights over the lateral grid at one time.
#[derive(Debug, Clone)]
pub struct InterfaceState {
    grid: StripGrid,
    base_depth: f64,
    gamma: Vec<f64>,
    time: f64,
}

impl InterfaceState {
    /// Validates and wraps an interface profile.
    ///
    /// Requirements: one height per lateral node; all heights finite; the
    /// graph stays well away from the bottom (`min gamma > -H + 4 h_y (H +
    /// max gamma)`, so at least four mapped cells of fluid remain under the
    /// lowest point); and the lateral slope never exceeds one in magnitude,
    /// keeping the graph description honest.
    pub fn new(grid: StripGrid, base_depth: f64, gamma: Vec<f64>, time: f64) -> Result<Self> {
        if gamma.len() != grid.nx() {
            return Err(CoreError::Invalid {
                what: "interface heights",
                detail: format!("{} values on a {}-node lateral grid", gamma.len(), grid.nx()),
            });
        }
        if gamma.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Invalid {
                what: "interface heights",
                detail: "non-finite height".into(),
            });
        }
        if !(base_depth > 0.0) {
            return Err(CoreError::Invalid {
                what: "base depth",
                detail: format!("{base_depth} must be positive"),
            });
        }
        let max_g = gamma.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min_g = gamma.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if !(min_g > -base_depth + 4.0 * grid.hy() * (base_depth + max_g)) {
            return Err(CoreError::Degenerate {
                what: "interface pinching",
                detail: format!(
                    "min height {min_g} too close to the bottom at depth {base_depth}"
                ),
            });
        }
        let state = Self {
            grid,
            base_depth,
            gamma,
            time,
        };
        let slope = state.max_slope();
        if slope > 1.0 {
            return Err(CoreError::Degenerate {
                what: "interface slope",
                detail: format!("max |gamma'| = {slope} exceeds 1; graph description unreliable"),
            });
        }
        Ok(state)
    }

    /// Strip grid the state lives on.
    pub fn grid(&self) -> &StripGrid {
        &self.grid
    }

    /// Bottom depth `H`.
    pub fn base_depth(&self) -> f64 {
        self.base_depth
    }

    /// Interface heights per lateral node.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Simulation time of this snapshot.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Lateral mean height.
    pub fn mean_height(&self) -> f64 {
        self.gamma.iter().sum::<f64>() / self.gamma.len() as f64
    }

    /// Maximum centred-difference slope magnitude.
    pub fn max_slope(&self) -> f64 {
        let n = self.grid.nx();
        let h = self.grid.x().h();
        (0..n)
            .map(|i| {
                libm::fabs(self.gamma[(i + 1) % n] - self.gamma[(i + n - 1) % n]) / (2.0 * h)
            })
            .fold(0.0f64, f64::max)
    }

    /// Height oscillation (max minus min).
    pub fn oscillation(&self) -> f64 {
        let max = self.gamma.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min = self.gamma.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        max - min
    }
}

/// One recorded snapshot of a trajectory: the interface, the solved
/// pressure field on the full strip (rows `0..=ny`), the interface speed,
/// and solver telemetry.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub gamma: Vec<f64>,
    pub field: Vec<f64>,
    pub speed: Vec<f64>,
    pub stats: SolveStats,
}

/// A completed run: snapshots at the requested cadence plus grid metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: StripGrid,
    pub base_depth: f64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Snapshot whose time is nearest `t` (ties resolve to the earlier one).
    pub fn nearest(&self, t: f64) -> &Snapshot {
        let mut best = 0usize;
        let mut dist = f64::INFINITY;
        for (i, s) in self.snapshots.iter().enumerate() {
            let d = libm::fabs(s.time - t);
            if d < dist {
                dist = d;
                best = i;
            }
        }
        &self.snapshots[best]
    }
}

/// Largest stable explicit step for influx bound `a_max`: the stiffest
/// resolvable mode relaxes at rate `a_max k_max` with `k_max = pi / h_x`,
/// and the safety factor keeps Euler well inside its stability interval.
pub fn dt_max(grid: &StripGrid, a_max: f64) -> f64 {
    let kmax = core::f64::consts::PI / grid.x().h();
    2.0 * DT_SAFETY / (a_max * kmax)
}

/// Advances one explicit Euler step of size `dt`, solving the pressure
/// problem at the current interface.  Returns the new state plus the solved
/// field, speed, and solver stats of the step it consumed.
pub fn step(
    state: &InterfaceState,
    influx: &Schedule,
    dt: f64,
) -> Result<(InterfaceState, Vec<f64>, Vec<f64>, SolveStats)> {
    let a = influx.value_at(state.time);
    let mapping = Mapping::build(state.grid.clone(), state.base_depth, &state.gamma)?;
    let nx = state.grid.nx();
    let (field, stats) = mapping.solve(&alloc::vec![0.0; nx], a)?;
    let speed = mapping.boundary_gradient(&field);

    let h = state.grid.x().h();
    let n = nx;
    let new_gamma: Vec<f64> = (0..n)
        .map(|i| {
            let gp = (state.gamma[(i + 1) % n] - state.gamma[(i + n - 1) % n]) / (2.0 * h);
            state.gamma[i] + dt * libm::sqrt(1.0 + gp * gp) * speed[i]
        })
        .collect();
    let new_state = InterfaceState::new(
        state.grid.clone(),
        state.base_depth,
        new_gamma,
        state.time + dt,
    )?;
    Ok((new_state, field, speed, stats))
}

/// Runs the front from `initial` to `t_end`, never stepping across an
/// influx jump, recording exactly `record` evenly spaced snapshots (the
/// first and last included).  Recording marks are integer fractions of the
/// window and the stepper shortens steps to land on them exactly, so runs
/// of different `dt` over the same window share identical snapshot times.
/// `dt` must not exceed the stability bound.
pub fn run(
    initial: InterfaceState,
    influx: &Schedule,
    t_end: f64,
    dt: f64,
    record: usize,
) -> Result<Trajectory> {
    if !(t_end > initial.time()) {
        return Err(CoreError::Invalid {
            what: "end time",
            detail: format!("{t_end} not after start {}", initial.time()),
        });
    }
    let bound = dt_max(&initial.grid, influx.max_value());
    if dt > bound * (1.0 + 1e-12) {
        return Err(CoreError::Invalid {
            what: "time step",
            detail: format!("{dt} exceeds the stability bound {bound}"),
        });
    }
    let record = record.max(2);

    let t0 = initial.time();
    let total = t_end - t0;
    let tol = 1e-12 * total.max(1.0);
    let mut marks: Vec<f64> = (0..record)
        .map(|m| t0 + total * m as f64 / (record - 1) as f64)
        .collect();
    marks[record - 1] = t_end;
    let jumps = influx.jumps_within(t0, t_end);

    let mut snapshots: Vec<Snapshot> = Vec::with_capacity(record);
    let mut state = initial;
    let mut mark_idx = 0usize;

    loop {
        let t = state.time();
        // Record (by solving at the current interface) every mark reached.
        while mark_idx < marks.len() && marks[mark_idx] <= t + tol {
            let mapping = Mapping::build(state.grid.clone(), state.base_depth, state.gamma())?;
            let a = influx.value_at(t);
            let (field, stats) = mapping.solve(&alloc::vec![0.0; state.grid.nx()], a)?;
            let speed = mapping.boundary_gradient(&field);
            snapshots.push(Snapshot {
                time: t,
                gamma: state.gamma().to_vec(),
                field,
                speed,
                stats,
            });
            mark_idx += 1;
        }
        if t_end - t <= tol {
            break;
        }
        // Shorten the step to land exactly on the next mark or influx jump.
        let mut step_dt = dt.min(t_end - t);
        if mark_idx < marks.len() && marks[mark_idx] - t < step_dt - tol {
            step_dt = marks[mark_idx] - t;
        }
        for &j in &jumps {
            if j > t + tol && j - t < step_dt - tol {
                step_dt = j - t;
            }
        }
        let (next, _, _, _) = step(&state, influx, step_dt)?;
        state = next;
    }

    Ok(Trajectory {
        grid: state.grid().clone(),
        base_depth: state.base_depth(),
        snapshots,
    })
}

/// Predicted relaxation rate of lateral mode `k` on a layer of depth `layer`
/// under influx `a`: perturbations about the planar front decay like
/// `exp(-a k tanh(k layer) t)`.
pub fn dispersion_rate(a: f64, k: f64, layer: f64) -> f64 {
    -a * k * libm::tanh(k * layer)
}

/// Measured decay of one lateral mode across a trajectory.
#[derive(Debug, Clone)]
pub struct DispersionFit {
    /// Mode number fitted.
    pub mode: usize,
    /// Least-squares slope of `ln` amplitude against time.
    pub measured_rate: f64,
    /// Predicted rate at the mean layer depth of the run.
    pub predicted_rate: f64,
    /// Relative deviation of the measured rate from the prediction.
    pub relative_error: f64,
    /// Root-mean-square residual of the log-amplitude regression.
    pub fit_residual: f64,
    /// Amplitudes actually used (time, amplitude).
    pub samples: Vec<(f64, f64)>,
}

/// Fits the exponential decay rate of mode `k` over the recorded snapshots
/// and compares with the dispersion prediction evaluated at the time-mean
/// layer depth.  Snapshots whose amplitude has fallen below `floor` are
/// excluded from the fit (they are dominated by solver noise).  The fit
/// must be honestly exponential: a root-mean-square regression residual
/// above 1e-3 rejects the sample set.
pub fn fit_mode_decay(traj: &Trajectory, mode: usize, floor: f64) -> Result<DispersionFit> {
    let mut samples = Vec::new();
    let mut depth_sum = 0.0;
    let mut depth_cnt = 0usize;
    for snap in &traj.snapshots {
        let amp = mode_amplitude(&traj.grid.x(), &snap.gamma, mode)?;
        let mean = snap.gamma.iter().sum::<f64>() / snap.gamma.len() as f64;
        if amp > floor {
            samples.push((snap.time, amp));
            depth_sum += mean + traj.base_depth;
            depth_cnt += 1;
        }
    }
    if samples.len() < 3 {
        return Err(CoreError::Degenerate {
            what: "mode decay fit",
            detail: format!(
                "only {} usable snapshots above the amplitude floor {floor}",
                samples.len()
            ),
        });
    }
    let n = samples.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, amp) in &samples {
        let y = libm::log(amp);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    let mut ss = 0.0;
    for &(t, amp) in &samples {
        let resid = libm::log(amp) - (intercept + slope * t);
        ss += resid * resid;
    }
    let fit_residual = libm::sqrt(ss / n);
    if fit_residual > 1e-3 {
        return Err(CoreError::Degenerate {
            what: "mode decay fit",
            detail: format!(
                "log-amplitude regression residual {fit_residual} exceeds 1e-3; decay not exponential"
            ),
        });
    }
    let layer = depth_sum / depth_cnt as f64;

    // Influx over the sampled window from the planar advance of the mean.
    let first = samples.first().unwrap().0;
    let last = samples.last().unwrap().0;
    let mean_first = traj.nearest(first).gamma.iter().sum::<f64>()
        / traj.grid.nx() as f64;
    let mean_last = traj.nearest(last).gamma.iter().sum::<f64>()
        / traj.grid.nx() as f64;
    let a_eff = (mean_last - mean_first) / (last - first);

    let k = libm::fabs(traj.grid.x().wavenumber(mode));
    let predicted = dispersion_rate(a_eff, k, layer);
    Ok(DispersionFit {
        mode,
        measured_rate: slope,
        predicted_rate: predicted,
        relative_error: libm::fabs(slope - predicted) / libm::fabs(predicted),
        fit_residual,
        samples,
    })
}

/// Sandwich verdict for a run against the planar reference front
/// `gamma_0 + A(t)`: every snapshot must stay within `eps` of it.
#[derive(Debug, Clone)]
pub struct FlatnessReport {
    /// Largest deviation `|gamma(x', t) - (gamma_0 + A(t))|` over the run.
    pub worst_deviation: f64,
    /// Snapshot time where the worst deviation occurred.
    pub worst_time: f64,
    /// `eps` minus the worst deviation; nonnegative iff the run passes.
    pub margin: f64,
    /// True when the whole run stays inside the sandwich.
    pub ok: bool,
}

/// Verifies the graph form of the planar sandwich: each snapshot's heights
/// stay within `eps` of the reference `gamma_0 + A(t)`, with `A` the
/// influx accumulated from the first snapshot.  Reports the worst margin.
pub fn flatness_check(
    traj: &Trajectory,
    influx: &Schedule,
    gamma0: f64,
    eps: f64,
) -> Result<FlatnessReport> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CoreError::Invalid {
            what: "flatness tolerance",
            detail: format!("{eps} must be a nonnegative number"),
        });
    }
    let first = traj.snapshots.first().ok_or(CoreError::Degenerate {
        what: "flatness check",
        detail: "empty trajectory".into(),
    })?;
    let t0 = first.time;
    let mut worst = 0.0f64;
    let mut worst_time = t0;
    for snap in &traj.snapshots {
        let reference = gamma0 + influx.integral(t0, snap.time);
        for &g in &snap.gamma {
            let d = libm::fabs(g - reference);
            if d > worst {
                worst = d;
                worst_time = snap.time;
            }
        }
    }
    Ok(FlatnessReport {
        worst_deviation: worst,
        worst_time,
        margin: eps - worst,
        ok: worst <= eps,
    })
}

/// Crest/trough speed diagnostics of a wavy run: the oscillation of the
/// final interface against the initial one, plus the gradient asymmetry of
/// the first snapshot (crests move slower, troughs faster, in proportion
/// to `delta k tanh(k layer)` for a mode of amplitude `delta`).
#[derive(Debug, Clone)]
pub struct SpeedAsymmetry {
    pub initial_oscillation: f64,
    pub final_oscillation: f64,
    pub crest_speed: f64,
    pub trough_speed: f64,
    pub planar_speed: f64,
}

/// Measures oscillation decay and crest/trough speed asymmetry on a run.
pub fn speed_asymmetry(traj: &Trajectory) -> Result<SpeedAsymmetry> {
    let first = traj.snapshots.first().ok_or(CoreError::Degenerate {
        what: "speed asymmetry",
        detail: "empty trajectory".into(),
    })?;
    let last = traj.snapshots.last().unwrap();

    let osc = |g: &[f64]| {
        let max = g.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min = g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        max - min
    };

    let mut crest = 0usize;
    let mut trough = 0usize;
    for (i, &g) in first.gamma.iter().enumerate() {
        if g > first.gamma[crest] {
            crest = i;
        }
        if g < first.gamma[trough] {
            trough = i;
        }
    }
    let planar = first.speed.iter().sum::<f64>() / first.speed.len() as f64;
    Ok(SpeedAsymmetry {
        initial_oscillation: osc(&first.gamma),
        final_oscillation: osc(&last.gamma),
        crest_speed: first.speed[crest],
        trough_speed: first.speed[trough],
        planar_speed: planar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid1D;

    fn strip(nx: usize, ny: usize) -> StripGrid {
        StripGrid::new(PeriodicGrid1D::with_default_length(nx).unwrap(), ny).unwrap()
    }

    #[test]
    fn planar_front_advances_by_the_influx_integral() {
        let grid = strip(16, 8);
        let influx = Schedule::constant(1.0).unwrap();
        let initial = InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.0; 16], 0.0).unwrap();
        let dt = dt_max(&grid, 1.0);
        let traj = run(initial, &influx, 0.5, dt, 3).unwrap();
        let last = traj.snapshots.last().unwrap();
        assert!((last.time - 0.5).abs() < 1e-12);
        for &g in &last.gamma {
            assert!((g - 0.5).abs() < 1e-10, "height {g}");
        }
    }

    #[test]
    fn planar_front_tracks_a_jumping_influx_exactly() {
        let grid = strip(16, 8);
        let influx = Schedule::new(&[(0.0, 1.0), (0.3, 2.0)]).unwrap();
        let initial = InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.1; 16], 0.0).unwrap();
        let dt = dt_max(&grid, 2.0);
        let traj = run(initial, &influx, 0.5, dt, 3).unwrap();
        let last = traj.snapshots.last().unwrap();
        // integral of a over [0, 0.5] = 0.3 * 1 + 0.2 * 2 = 0.7.
        for &g in &last.gamma {
            assert!((g - 0.8).abs() < 1e-10, "height {g}");
        }
    }

    #[test]
    fn wavy_mode_decays_at_the_predicted_rate() {
        let nx = 64;
        let grid = strip(nx, 32);
        let influx = Schedule::constant(1.0).unwrap();
        let k = 2usize;
        let delta = 0.01;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| delta * libm::cos(k as f64 * grid.x().node(i)))
            .collect();
        let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.0);
        let traj = run(initial, &influx, 0.4, dt, 21).unwrap();
        let fit = fit_mode_decay(&traj, k, 1e-9).unwrap();
        let rel = libm::fabs(fit.measured_rate - fit.predicted_rate)
            / libm::fabs(fit.predicted_rate);
        assert!(
            rel < 0.05,
            "measured {} predicted {} rel {rel}",
            fit.measured_rate,
            fit.predicted_rate
        );
    }

    #[test]
    fn crests_move_slower_than_troughs() {
        let nx = 64;
        let grid = strip(nx, 32);
        let influx = Schedule::constant(1.0).unwrap();
        let k = 1usize;
        let delta = 0.05;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| delta * libm::cos(k as f64 * grid.x().node(i)))
            .collect();
        let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.0);
        let traj = run(initial, &influx, 0.2, dt, 5).unwrap();
        let rep = speed_asymmetry(&traj).unwrap();
        assert!(rep.final_oscillation < rep.initial_oscillation);
        // Linearized asymmetry: speeds 1 -+ delta k tanh(k layer).
        let layer = 2.0;
        let kt = (k as f64) * libm::tanh(k as f64 * layer);
        let expect_crest = 1.0 - delta * kt;
        let expect_trough = 1.0 + delta * kt;
        assert!(
            libm::fabs(rep.crest_speed - expect_crest) < 0.25 * delta * kt,
            "crest {} vs {expect_crest}",
            rep.crest_speed
        );
        assert!(
            libm::fabs(rep.trough_speed - expect_trough) < 0.25 * delta * kt,
            "trough {} vs {expect_trough}",
            rep.trough_speed
        );
        assert!(rep.crest_speed < rep.planar_speed);
        assert!(rep.trough_speed > rep.planar_speed);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let grid = strip(16, 8);
        let influx = Schedule::constant(1.0).unwrap();
        let initial = InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.0; 16], 0.0).unwrap();
        let dt = 10.0 * dt_max(&grid, 1.0);
        assert!(run(initial, &influx, 0.5, dt, 3).is_err());
    }

    #[test]
    fn steep_interface_is_rejected() {
        let grid = strip(16, 8);
        let gamma: Vec<f64> = (0..16)
            .map(|i| 1.2 * libm::sin(grid.x().node(i)))
            .collect();
        assert!(InterfaceState::new(grid, 4.0, gamma, 0.0).is_err());
    }

    #[test]
    fn dispersion_rate_deepens_to_the_half_laplacian() {
        let shallow = dispersion_rate(1.0, 2.0, 0.3);
        let deep = dispersion_rate(1.0, 2.0, 50.0);
        assert!((deep - (-2.0)).abs() < 1e-10);
        assert!(shallow > deep); // shallower layers relax slower
    }

    #[test]
    fn sandwich_check_reports_margins_by_amplitude() {
        let nx = 32;
        let grid = strip(nx, 16);
        let influx = Schedule::constant(1.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.0);

        // Planar run: any positive eps passes with full margin.
        let planar = InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.2; nx], 0.0).unwrap();
        let traj = run(planar, &influx, 0.3, dt, 4).unwrap();
        let rep = flatness_check(&traj, &influx, 0.2, 0.03).unwrap();
        assert!(rep.ok);
        assert!((rep.margin - 0.03).abs() < 1e-9, "margin {}", rep.margin);
        // Zero tolerance still passes a planar run up to solver noise.
        assert!(flatness_check(&traj, &influx, 0.2, 1e-9).unwrap().ok);

        // Single decaying mode: passes iff eps covers the initial amplitude.
        let delta = 0.02;
        let gamma: Vec<f64> = (0..nx)
            .map(|i| delta * libm::cos(grid.x().node(i)))
            .collect();
        let wavy = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let traj = run(wavy, &influx, 0.3, dt, 4).unwrap();
        let pass = flatness_check(&traj, &influx, 0.0, delta * 1.05).unwrap();
        assert!(pass.ok, "deviation {}", pass.worst_deviation);
        assert!((pass.worst_deviation - delta).abs() < 0.1 * delta);
        assert!(pass.worst_time.abs() < 1e-12, "decay makes t = 0 extremal");
        let fail = flatness_check(&traj, &influx, 0.0, delta * 0.5).unwrap();
        assert!(!fail.ok && fail.margin < 0.0);
        assert!(!flatness_check(&traj, &influx, 0.0, 0.0).unwrap().ok);
    }

    #[test]
    fn heights_never_decrease_along_a_run() {
        let nx = 32;
        let grid = strip(nx, 16);
        let influx = Schedule::new(&[(0.0, 1.0), (0.15, 0.5)]).unwrap();
        let gamma: Vec<f64> = (0..nx)
            .map(|i| {
                0.03 * libm::cos(grid.x().node(i)) + 0.02 * libm::sin(3.0 * grid.x().node(i))
            })
            .collect();
        let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.0);
        let traj = run(initial, &influx, 0.3, dt, 13).unwrap();
        for pair in traj.snapshots.windows(2) {
            for i in 0..nx {
                assert!(
                    pair[1].gamma[i] >= pair[0].gamma[i] - 1e-12,
                    "height fell at node {i}: {} -> {}",
                    pair[0].gamma[i],
                    pair[1].gamma[i]
                );
            }
        }
    }

    #[test]
    fn snapshot_times_are_shared_across_step_sizes() {
        let nx = 32;
        let grid = strip(nx, 16);
        let influx = Schedule::constant(1.0).unwrap();
        let dt = 0.5 * dt_max(&grid, 1.0);
        let make = |dt: f64| {
            let initial =
                InterfaceState::new(grid.clone(), 2.0, alloc::vec![0.1; nx], 0.0).unwrap();
            run(initial, &influx, 0.25, dt, 6).unwrap()
        };
        let coarse = make(dt);
        let fine = make(dt / 2.0);
        assert_eq!(coarse.snapshots.len(), 6);
        assert_eq!(fine.snapshots.len(), 6);
        for (c, f) in coarse.snapshots.iter().zip(fine.snapshots.iter()) {
            assert!(
                (c.time - f.time).abs() < 1e-12,
                "snapshot times diverge: {} vs {}",
                c.time,
                f.time
            );
        }
    }

    #[test]
    fn halving_the_step_halves_the_mode_error() {
        // Forward Euler is first order: successive step-halvings change the
        // final amplitude by factors of two (self-convergence cancels the
        // spatial bias shared by all three runs).
        let nx = 32;
        let grid = strip(nx, 16);
        let influx = Schedule::constant(1.0).unwrap();
        let delta = 0.01;
        let t_end = 0.2;
        let k = 1usize;
        let final_amp = |dt: f64| {
            let gamma: Vec<f64> = (0..nx)
                .map(|i| delta * libm::cos(grid.x().node(i)))
                .collect();
            let initial = InterfaceState::new(grid.clone(), 2.0, gamma, 0.0).unwrap();
            let traj = run(initial, &influx, t_end, dt, 3).unwrap();
            mode_amplitude(&grid.x(), &traj.snapshots.last().unwrap().gamma, k).unwrap()
        };
        let dt0 = 0.4 * dt_max(&grid, 1.0);
        let a0 = final_amp(dt0);
        let a1 = final_amp(dt0 / 2.0);
        let a2 = final_amp(dt0 / 4.0);
        let ratio = (a0 - a1).abs() / (a1 - a2).abs();
        assert!(
            (1.6..2.6).contains(&ratio),
            "step-halving difference ratio {ratio} (amps {a0}, {a1}, {a2})"
        );
    }
}
