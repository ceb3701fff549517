//! Run configuration: a documented flat key-value grammar with typed
//! sections, parsed into a fully-defaulted [`RunConfig`].
//!
//! Grammar (see the FORMATS document for byte-level examples):
//!
//! ```text
//! # comments run to end of line; blank lines are ignored
//! experiment = simulate          # top-level keys come before any section
//!
//! [grid]                         # section header
//! nx = 256                       # key = value
//! ny = 64
//!
//! [influx]
//! schedule = 0:1, 0.5:2          # list of time:value pairs
//! ```
//!
//! Parsing never stops at the first problem: every violation is collected
//! with its line and column, unknown sections and keys are rejected, and
//! values are validated field by field (positivity, ranges, list shapes)
//! so a bad config is reported in full in one pass.

use crate::{LabError, Result};
use serde::Serialize;
use std::fmt;
use std::path::Path;

/// One schema violation, pinned to its source location.
#[derive(Debug, Clone)]
pub struct Violation {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

/// The eight experiment kinds plus the composite suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Simulate,
    Linearize,
    Harnack,
    Ladder,
    Supconv,
    Deform,
    Barrier,
    Interp,
    All,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Linearize => "linearize",
            ExperimentKind::Harnack => "harnack",
            ExperimentKind::Ladder => "ladder",
            ExperimentKind::Supconv => "supconv",
            ExperimentKind::Deform => "deform",
            ExperimentKind::Barrier => "barrier",
            ExperimentKind::Interp => "interp",
            ExperimentKind::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => ExperimentKind::Simulate,
            "linearize" => ExperimentKind::Linearize,
            "harnack" => ExperimentKind::Harnack,
            "ladder" => ExperimentKind::Ladder,
            "supconv" => ExperimentKind::Supconv,
            "deform" => ExperimentKind::Deform,
            "barrier" => ExperimentKind::Barrier,
            "interp" => ExperimentKind::Interp,
            "all" => ExperimentKind::All,
            _ => return None,
        })
    }

    /// The atomic experiments, in suite order.
    pub fn suite() -> [ExperimentKind; 8] {
        [
            ExperimentKind::Simulate,
            ExperimentKind::Linearize,
            ExperimentKind::Harnack,
            ExperimentKind::Ladder,
            ExperimentKind::Supconv,
            ExperimentKind::Deform,
            ExperimentKind::Barrier,
            ExperimentKind::Interp,
        ]
    }
}

/// Lateral/vertical grid sizes.
#[derive(Debug, Clone, Serialize)]
pub struct GridCfg {
    /// Lateral nodes; a power of two, at least 8.
    pub nx: usize,
    /// Vertical cells of the strip.
    pub ny: usize,
}

/// Physical domain parameters.
#[derive(Debug, Clone, Serialize)]
pub struct DomainCfg {
    /// Bottom depth `H`.
    pub base_depth: f64,
    /// Flatness parameter `eps`.
    pub eps: f64,
    /// Initial planar reference height.
    pub gamma0: f64,
}

/// Time-stepping parameters.
#[derive(Debug, Clone, Serialize)]
pub struct TimeCfg {
    pub t_end: f64,
    pub dt: f64,
    /// Number of recorded snapshots (at least 2).
    pub record: usize,
}

/// Influx schedule and its sanity bounds.
#[derive(Debug, Clone, Serialize)]
pub struct InfluxCfg {
    /// `(start, value)` pairs, strictly increasing in time.
    pub schedule: Vec<(f64, f64)>,
    /// Ellipticity floor the schedule must respect.
    pub lambda: f64,
    /// Ellipticity ceiling.
    pub big_lambda: f64,
}

/// Run identity: seed, output subdirectory, optional binary dumps.
#[derive(Debug, Clone, Serialize)]
pub struct RunCfg {
    pub seed: u64,
    /// Subdirectory under the output root; defaults to the experiment name.
    pub subdir: Option<String>,
    /// Emit binary field dumps alongside the CSV datasets.
    pub binary_fields: bool,
}

/// Simulation experiment knobs.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateCfg {
    /// Modes to fit in the dispersion stage.
    pub modes: Vec<usize>,
    /// Initial perturbation amplitude for the dispersion stage.
    pub delta: f64,
    /// Duration of the planar tracking runs (grid-independent check, so
    /// it gets its own clock and a small lattice).
    pub planar_t: f64,
    /// Lateral nodes of the planar tracking runs.
    pub planar_nx: usize,
    /// Vertical cells of the planar tracking runs.
    pub planar_ny: usize,
}

/// Linearization sweep knobs.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizeCfg {
    /// Flatness values swept, strictly decreasing.
    pub sweep: Vec<f64>,
}

/// Oscillation-decay experiment knobs.
#[derive(Debug, Clone, Serialize)]
pub struct HarnackCfg {
    pub levels: usize,
    pub mu_bar: f64,
    pub base_radius: f64,
    pub truncation: f64,
    pub center: f64,
}

/// Bootstrap-ladder experiment knobs.
#[derive(Debug, Clone, Serialize)]
pub struct LadderCfg {
    /// Seminorm bound each rung is compared against.
    pub bound: f64,
    /// Minimum coarse cells a rung radius must span.
    pub min_cells: usize,
    /// Lateral size of the refined comparison run.
    pub refine_nx: usize,
    /// Pair-distance truncation of the rung seminorms.
    pub truncation: f64,
    /// Half-window span of the influx-jump gradient comparison.
    pub window: f64,
}

/// Convolution-battery knobs.
#[derive(Debug, Clone, Serialize)]
pub struct SupconvCfg {
    pub trials: usize,
    pub xi: f64,
    pub tau: f64,
    /// Flatness constant `N` of the penalty paraboloids.
    pub flatness: f64,
}

/// Deformation-comparison knobs.
#[derive(Debug, Clone, Serialize)]
pub struct DeformCfg {
    /// Deformation sizes swept, strictly decreasing.
    pub sweep: Vec<f64>,
    /// Quadratic coefficient of the inversion comparison.
    pub b: f64,
    /// Shear vector `(p_1, p_n)`.
    pub p: (f64, f64),
    /// Half-ball evaluation lattice resolution.
    pub resolution: usize,
    /// Lower bound the sweep regression slope must clear.
    pub alpha_cfg: f64,
    /// Discrepancy ceiling at the smallest deformation size.
    pub sigma: f64,
}

/// Barrier-survey knobs.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierCfg {
    /// Dip radii surveyed.
    pub dips: Vec<f64>,
    pub dim: usize,
    /// Angular lattice nodes per survey.
    pub nodes: usize,
    /// Density-ODE forcing constant.
    pub ode_c: f64,
    /// Density-ODE damping constant.
    pub ode_big_c: f64,
    /// Density-ODE flatness scale.
    pub ode_eps: f64,
}

/// Interpolation-lemma knobs.
#[derive(Debug, Clone, Serialize)]
pub struct InterpCfg {
    pub trials: usize,
    pub alpha: f64,
    pub beta: f64,
    pub h0: f64,
    /// Nodes of the `[-1, 1]` sample lattice (odd, at least 5).
    pub grid_n: usize,
}

/// Fully-resolved run configuration; every field is echoed into the
/// manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub grid: GridCfg,
    pub domain: DomainCfg,
    pub time: TimeCfg,
    pub influx: InfluxCfg,
    pub run: RunCfg,
    pub simulate: SimulateCfg,
    pub linearize: LinearizeCfg,
    pub harnack: HarnackCfg,
    pub ladder: LadderCfg,
    pub supconv: SupconvCfg,
    pub deform: DeformCfg,
    pub barrier: BarrierCfg,
    pub interp: InterpCfg,
}

impl RunConfig {
    /// The defaults every config starts from; tuned so each experiment's
    /// acceptance checks run in seconds.
    pub fn defaults(kind: ExperimentKind) -> Self {
        RunConfig {
            experiment: kind,
            grid: GridCfg { nx: 128, ny: 64 },
            domain: DomainCfg {
                base_depth: 2.0,
                eps: 0.05,
                gamma0: 0.0,
            },
            time: TimeCfg {
                t_end: 0.5,
                dt: 0.002,
                record: 26,
            },
            influx: InfluxCfg {
                schedule: vec![(0.0, 1.0)],
                lambda: 0.05,
                big_lambda: 20.0,
            },
            run: RunCfg {
                seed: 7,
                subdir: None,
                binary_fields: false,
            },
            simulate: SimulateCfg {
                modes: vec![1, 2, 3, 4],
                delta: 1e-3,
                planar_t: 1.0,
                planar_nx: 64,
                planar_ny: 32,
            },
            linearize: LinearizeCfg {
                sweep: vec![0.1, 0.05, 0.025],
            },
            harnack: HarnackCfg {
                levels: 4,
                mu_bar: 0.5,
                base_radius: 1.0,
                truncation: 0.0,
                center: core::f64::consts::PI,
            },
            ladder: LadderCfg {
                bound: 10.0,
                min_cells: 2,
                refine_nx: 256,
                truncation: 0.0125,
                window: 0.06,
            },
            supconv: SupconvCfg {
                trials: 100,
                xi: 0.25,
                tau: 0.04,
                flatness: 2.0,
            },
            deform: DeformCfg {
                sweep: vec![0.1, 0.03, 0.01],
                b: 1.0,
                p: (0.8, 0.5),
                resolution: 41,
                alpha_cfg: 0.25,
                sigma: 0.05,
            },
            barrier: BarrierCfg {
                dips: vec![0.01, 0.02, 0.04],
                dim: 2,
                nodes: 4096,
                ode_c: 0.5,
                ode_big_c: 1.0,
                ode_eps: 0.05,
            },
            interp: InterpCfg {
                trials: 1000,
                alpha: 0.5,
                beta: 0.7,
                h0: 0.25,
                grid_n: 41,
            },
        }
    }

    /// Directory name this run writes into under the output root.
    pub fn subdir_name(&self) -> &str {
        self.run
            .subdir
            .as_deref()
            .unwrap_or_else(|| self.experiment.as_str())
    }

    /// Canonical serialized form; hashed into the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }
}

struct Parser<'a> {
    cfg: &'a mut RunConfig,
    violations: Vec<Violation>,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn violation(&mut self, message: String) {
        self.violations.push(Violation {
            line: self.line,
            col: self.col,
            message,
        });
    }

    fn f64_field(&mut self, raw: &str, name: &str) -> Option<f64> {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.violation(format!("{name}: expected a finite number, got {raw:?}"));
                None
            }
        }
    }

    fn positive_field(&mut self, raw: &str, name: &str) -> Option<f64> {
        let v = self.f64_field(raw, name)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.violation(format!("{name}: must be positive, got {v}"));
            None
        }
    }

    fn usize_field(&mut self, raw: &str, name: &str, min: usize) -> Option<usize> {
        match raw.parse::<usize>() {
            Ok(v) if v >= min => Some(v),
            Ok(v) => {
                self.violation(format!("{name}: must be at least {min}, got {v}"));
                None
            }
            Err(_) => {
                self.violation(format!("{name}: expected an unsigned integer, got {raw:?}"));
                None
            }
        }
    }

    fn bool_field(&mut self, raw: &str, name: &str) -> Option<bool> {
        match raw {
            "true" => Some(true),
            "false" => Some(false),
            _ => {
                self.violation(format!("{name}: expected true or false, got {raw:?}"));
                None
            }
        }
    }

    fn f64_list(&mut self, raw: &str, name: &str) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        for part in raw.split(',') {
            let v = self.f64_field(part.trim(), name)?;
            out.push(v);
        }
        if out.is_empty() {
            self.violation(format!("{name}: list must not be empty"));
            return None;
        }
        Some(out)
    }

    fn decreasing_positive_list(&mut self, raw: &str, name: &str) -> Option<Vec<f64>> {
        let list = self.f64_list(raw, name)?;
        if list.iter().any(|&v| v <= 0.0) {
            self.violation(format!("{name}: all entries must be positive"));
            return None;
        }
        if list.windows(2).any(|w| w[1] >= w[0]) {
            self.violation(format!("{name}: entries must strictly decrease"));
            return None;
        }
        Some(list)
    }

    fn usize_list(&mut self, raw: &str, name: &str) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        for part in raw.split(',') {
            match part.trim().parse::<usize>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.violation(format!(
                        "{name}: expected a comma-separated list of unsigned integers"
                    ));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn schedule_field(&mut self, raw: &str) -> Option<Vec<(f64, f64)>> {
        let mut pairs = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            let Some((t, v)) = part.split_once(':') else {
                self.violation(format!(
                    "influx.schedule: expected time:value pairs, got {part:?}"
                ));
                return None;
            };
            let t = self.f64_field(t.trim(), "influx.schedule time")?;
            let v = self.f64_field(v.trim(), "influx.schedule value")?;
            if v < 0.0 {
                self.violation(format!("influx.schedule: value {v} must be nonnegative"));
                return None;
            }
            pairs.push((t, v));
        }
        if pairs.windows(2).any(|w| w[1].0 <= w[0].0) {
            self.violation("influx.schedule: times must strictly increase".into());
            return None;
        }
        Some(pairs)
    }

    fn apply(&mut self, section: &str, key: &str, raw: &str) {
        macro_rules! set {
            ($slot:expr, $value:expr) => {
                if let Some(v) = $value {
                    $slot = v;
                }
            };
        }
        match (section, key) {
            ("", "experiment") => match ExperimentKind::parse(raw) {
                Some(kind) => {
                    if kind != self.cfg.experiment {
                        self.violation(format!(
                            "experiment: config names {raw:?} but the invocation runs {:?}",
                            self.cfg.experiment.as_str()
                        ));
                    }
                }
                None => self.violation(format!("experiment: unknown kind {raw:?}")),
            },
            ("grid", "nx") => {
                if let Some(v) = self.usize_field(raw, "grid.nx", 8) {
                    if v.is_power_of_two() {
                        self.cfg.grid.nx = v;
                    } else {
                        self.violation(format!("grid.nx: must be a power of two, got {v}"));
                    }
                }
            }
            ("grid", "ny") => set!(self.cfg.grid.ny, self.usize_field(raw, "grid.ny", 4)),
            ("domain", "base_depth") => set!(
                self.cfg.domain.base_depth,
                self.positive_field(raw, "domain.base_depth")
            ),
            ("domain", "eps") => {
                set!(self.cfg.domain.eps, self.positive_field(raw, "domain.eps"))
            }
            ("domain", "gamma0") => {
                set!(self.cfg.domain.gamma0, self.f64_field(raw, "domain.gamma0"))
            }
            ("time", "t_end") => set!(self.cfg.time.t_end, self.positive_field(raw, "time.t_end")),
            ("time", "dt") => set!(self.cfg.time.dt, self.positive_field(raw, "time.dt")),
            ("time", "record") => {
                set!(self.cfg.time.record, self.usize_field(raw, "time.record", 2))
            }
            ("influx", "schedule") => set!(self.cfg.influx.schedule, self.schedule_field(raw)),
            ("influx", "lambda") => set!(
                self.cfg.influx.lambda,
                self.positive_field(raw, "influx.lambda")
            ),
            ("influx", "big_lambda") => set!(
                self.cfg.influx.big_lambda,
                self.positive_field(raw, "influx.big_lambda")
            ),
            ("run", "seed") => match raw.parse::<u64>() {
                Ok(v) => self.cfg.run.seed = v,
                Err(_) => self.violation(format!("run.seed: expected an unsigned integer, got {raw:?}")),
            },
            ("run", "subdir") => {
                let ok = !raw.is_empty()
                    && std::path::Path::new(raw)
                        .components()
                        .all(|c| matches!(c, std::path::Component::Normal(_)))
                    && !raw.contains('/')
                    && !raw.contains('\\');
                if ok {
                    self.cfg.run.subdir = Some(raw.to_string());
                } else {
                    self.violation(format!(
                        "run.subdir: must be a plain directory name, got {raw:?}"
                    ));
                }
            }
            ("run", "binary_fields") => set!(
                self.cfg.run.binary_fields,
                self.bool_field(raw, "run.binary_fields")
            ),
            ("simulate", "modes") => {
                if let Some(v) = self.usize_list(raw, "simulate.modes") {
                    if v.iter().all(|&m| m >= 1) {
                        self.cfg.simulate.modes = v;
                    } else {
                        self.violation("simulate.modes: modes must be at least 1".into());
                    }
                }
            }
            ("simulate", "delta") => set!(
                self.cfg.simulate.delta,
                self.positive_field(raw, "simulate.delta")
            ),
            ("simulate", "planar_t") => set!(
                self.cfg.simulate.planar_t,
                self.positive_field(raw, "simulate.planar_t")
            ),
            ("simulate", "planar_nx") => {
                if let Some(v) = self.usize_field(raw, "simulate.planar_nx", 8) {
                    if v.is_power_of_two() {
                        self.cfg.simulate.planar_nx = v;
                    } else {
                        self.violation(format!(
                            "simulate.planar_nx: must be a power of two, got {v}"
                        ));
                    }
                }
            }
            ("simulate", "planar_ny") => set!(
                self.cfg.simulate.planar_ny,
                self.usize_field(raw, "simulate.planar_ny", 4)
            ),
            ("linearize", "sweep") => set!(
                self.cfg.linearize.sweep,
                self.decreasing_positive_list(raw, "linearize.sweep")
            ),
            ("harnack", "levels") => set!(
                self.cfg.harnack.levels,
                self.usize_field(raw, "harnack.levels", 2)
            ),
            ("harnack", "mu_bar") => {
                if let Some(v) = self.positive_field(raw, "harnack.mu_bar") {
                    if v < 1.0 {
                        self.cfg.harnack.mu_bar = v;
                    } else {
                        self.violation(format!("harnack.mu_bar: must lie in (0, 1), got {v}"));
                    }
                }
            }
            ("harnack", "base_radius") => set!(
                self.cfg.harnack.base_radius,
                self.positive_field(raw, "harnack.base_radius")
            ),
            ("harnack", "truncation") => {
                if let Some(v) = self.f64_field(raw, "harnack.truncation") {
                    if v >= 0.0 {
                        self.cfg.harnack.truncation = v;
                    } else {
                        self.violation(format!("harnack.truncation: must be nonnegative, got {v}"));
                    }
                }
            }
            ("harnack", "center") => set!(
                self.cfg.harnack.center,
                self.f64_field(raw, "harnack.center")
            ),
            ("ladder", "bound") => {
                set!(self.cfg.ladder.bound, self.positive_field(raw, "ladder.bound"))
            }
            ("ladder", "min_cells") => set!(
                self.cfg.ladder.min_cells,
                self.usize_field(raw, "ladder.min_cells", 1)
            ),
            ("ladder", "refine_nx") => {
                if let Some(v) = self.usize_field(raw, "ladder.refine_nx", 8) {
                    if v.is_power_of_two() {
                        self.cfg.ladder.refine_nx = v;
                    } else {
                        self.violation(format!("ladder.refine_nx: must be a power of two, got {v}"));
                    }
                }
            }
            ("ladder", "truncation") => {
                if let Some(v) = self.f64_field(raw, "ladder.truncation") {
                    if v >= 0.0 {
                        self.cfg.ladder.truncation = v;
                    } else {
                        self.violation(format!("ladder.truncation: must be nonnegative, got {v}"));
                    }
                }
            }
            ("ladder", "window") => set!(
                self.cfg.ladder.window,
                self.positive_field(raw, "ladder.window")
            ),
            ("supconv", "trials") => set!(
                self.cfg.supconv.trials,
                self.usize_field(raw, "supconv.trials", 1)
            ),
            ("supconv", "xi") => set!(self.cfg.supconv.xi, self.positive_field(raw, "supconv.xi")),
            ("supconv", "tau") => {
                set!(self.cfg.supconv.tau, self.positive_field(raw, "supconv.tau"))
            }
            ("supconv", "flatness") => set!(
                self.cfg.supconv.flatness,
                self.positive_field(raw, "supconv.flatness")
            ),
            ("deform", "sweep") => set!(
                self.cfg.deform.sweep,
                self.decreasing_positive_list(raw, "deform.sweep")
            ),
            ("deform", "b") => set!(self.cfg.deform.b, self.positive_field(raw, "deform.b")),
            ("deform", "p") => {
                if let Some(v) = self.f64_list(raw, "deform.p") {
                    if v.len() == 2 {
                        self.cfg.deform.p = (v[0], v[1]);
                    } else {
                        self.violation(format!("deform.p: expected two components, got {}", v.len()));
                    }
                }
            }
            ("deform", "resolution") => set!(
                self.cfg.deform.resolution,
                self.usize_field(raw, "deform.resolution", 9)
            ),
            ("deform", "alpha_cfg") => set!(
                self.cfg.deform.alpha_cfg,
                self.positive_field(raw, "deform.alpha_cfg")
            ),
            ("deform", "sigma") => {
                set!(self.cfg.deform.sigma, self.positive_field(raw, "deform.sigma"))
            }
            ("barrier", "dips") => {
                if let Some(v) = self.f64_list(raw, "barrier.dips") {
                    if v.iter().all(|&r| r > 0.0 && r < 0.05) {
                        self.cfg.barrier.dips = v;
                    } else {
                        self.violation("barrier.dips: dips must lie in (0, 0.05)".into());
                    }
                }
            }
            ("barrier", "dim") => {
                if let Some(v) = self.usize_field(raw, "barrier.dim", 2) {
                    if v <= 3 {
                        self.cfg.barrier.dim = v;
                    } else {
                        self.violation(format!("barrier.dim: must be 2 or 3, got {v}"));
                    }
                }
            }
            ("barrier", "nodes") => set!(
                self.cfg.barrier.nodes,
                self.usize_field(raw, "barrier.nodes", 16)
            ),
            ("barrier", "ode_c") => set!(
                self.cfg.barrier.ode_c,
                self.positive_field(raw, "barrier.ode_c")
            ),
            ("barrier", "ode_big_c") => set!(
                self.cfg.barrier.ode_big_c,
                self.positive_field(raw, "barrier.ode_big_c")
            ),
            ("barrier", "ode_eps") => set!(
                self.cfg.barrier.ode_eps,
                self.positive_field(raw, "barrier.ode_eps")
            ),
            ("interp", "trials") => set!(
                self.cfg.interp.trials,
                self.usize_field(raw, "interp.trials", 1)
            ),
            ("interp", "alpha") => {
                if let Some(v) = self.positive_field(raw, "interp.alpha") {
                    if v <= 1.0 {
                        self.cfg.interp.alpha = v;
                    } else {
                        self.violation(format!("interp.alpha: must lie in (0, 1], got {v}"));
                    }
                }
            }
            ("interp", "beta") => {
                if let Some(v) = self.positive_field(raw, "interp.beta") {
                    if v <= 1.0 {
                        self.cfg.interp.beta = v;
                    } else {
                        self.violation(format!("interp.beta: must lie in (0, 1], got {v}"));
                    }
                }
            }
            ("interp", "h0") => {
                if let Some(v) = self.positive_field(raw, "interp.h0") {
                    if v <= 1.0 {
                        self.cfg.interp.h0 = v;
                    } else {
                        self.violation(format!("interp.h0: must lie in (0, 1], got {v}"));
                    }
                }
            }
            ("interp", "grid_n") => {
                if let Some(v) = self.usize_field(raw, "interp.grid_n", 5) {
                    if v % 2 == 1 {
                        self.cfg.interp.grid_n = v;
                    } else {
                        self.violation(format!("interp.grid_n: must be odd, got {v}"));
                    }
                }
            }
            _ => {
                let place = if section.is_empty() {
                    format!("top-level key {key:?}")
                } else {
                    format!("key {key:?} in section [{section}]")
                };
                self.violation(format!("unknown {place}"));
            }
        }
    }
}

const KNOWN_SECTIONS: &[&str] = &[
    "grid", "domain", "time", "influx", "run", "simulate", "linearize", "harnack", "ladder",
    "supconv", "deform", "barrier", "interp",
];

/// Parses config text over the defaults for `kind`, collecting every
/// violation instead of stopping at the first.
pub fn parse_config_text(
    kind: ExperimentKind,
    text: &str,
) -> std::result::Result<RunConfig, Vec<Violation>> {
    let mut cfg = RunConfig::defaults(kind);
    let mut parser = Parser {
        cfg: &mut cfg,
        violations: Vec::new(),
        line: 0,
        col: 1,
    };
    let mut section = String::new();
    let mut section_known = true;

    for (idx, raw_line) in text.lines().enumerate() {
        parser.line = idx + 1;
        parser.col = 1;
        let line = match raw_line.split_once('#') {
            Some((head, _)) => head,
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        parser.col = indent + 1;

        if let Some(rest) = trimmed.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => {
                    section = name.trim().to_string();
                    section_known = KNOWN_SECTIONS.contains(&section.as_str());
                    if !section_known {
                        parser.violation(format!("unknown section [{section}]"));
                    }
                }
                _ => {
                    parser.violation(format!("malformed section header {trimmed:?}"));
                    section_known = false;
                }
            }
            continue;
        }

        let Some((key, value)) = trimmed.split_once('=') else {
            parser.violation(format!("expected `key = value`, got {trimmed:?}"));
            continue;
        };
        let key_name = key.trim();
        if key_name.is_empty() {
            parser.violation("empty key before `=`".into());
            continue;
        }
        // Column of the value, for value-level messages.
        let eq_pos = line.find('=').unwrap();
        let value_offset = line[eq_pos + 1..]
            .find(|c: char| !c.is_whitespace())
            .unwrap_or(0);
        parser.col = eq_pos + 2 + value_offset;
        let value = value.trim();
        if value.is_empty() {
            parser.violation(format!("key {key_name:?} has no value"));
            continue;
        }
        if section_known {
            parser.apply(&section, key_name, value);
        }
    }

    let violations = parser.violations;
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(violations)
    }
}

/// Loads and validates a config file over the defaults for `kind`.
pub fn parse_config(kind: ExperimentKind, path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        LabError::Config(vec![Violation {
            line: 0,
            col: 0,
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    parse_config_text(kind, &text).map_err(LabError::Config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config_text(ExperimentKind::Simulate, "experiment = simulate\n").unwrap();
        assert_eq!(cfg.grid.nx, 128);
        assert_eq!(cfg.influx.schedule, vec![(0.0, 1.0)]);
        assert_eq!(cfg.subdir_name(), "simulate");
    }

    #[test]
    fn negative_eps_is_rejected_with_location() {
        let text = "[domain]\neps = -0.05\n";
        let errs = parse_config_text(ExperimentKind::Simulate, text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 2);
        assert_eq!(errs[0].col, 7);
        assert!(errs[0].message.contains("domain.eps"), "{}", errs[0].message);
    }

    #[test]
    fn all_violations_are_collected() {
        let text = "experiment = simulate\n\
                    [grid]\n\
                    nx = 100\n\
                    mystery = 3\n\
                    [nosuch]\n\
                    key = 1\n\
                    [time]\n\
                    dt = frog\n";
        let errs = parse_config_text(ExperimentKind::Simulate, text).unwrap_err();
        let messages: Vec<String> = errs.iter().map(|v| v.to_string()).collect();
        assert_eq!(errs.len(), 4, "{messages:?}");
        assert!(messages[0].contains("power of two"));
        assert!(messages[1].contains("mystery"));
        assert!(messages[2].contains("[nosuch]"));
        assert!(messages[3].contains("time.dt"));
    }

    #[test]
    fn schedule_pairs_parse_and_validate() {
        let cfg = parse_config_text(
            ExperimentKind::Simulate,
            "[influx]\nschedule = 0:1, 0.5:2.5\n",
        )
        .unwrap();
        assert_eq!(cfg.influx.schedule, vec![(0.0, 1.0), (0.5, 2.5)]);
        assert!(parse_config_text(
            ExperimentKind::Simulate,
            "[influx]\nschedule = 0:1, 0:2\n"
        )
        .is_err());
        assert!(parse_config_text(
            ExperimentKind::Simulate,
            "[influx]\nschedule = 0:-1\n"
        )
        .is_err());
    }

    #[test]
    fn experiment_mismatch_is_a_violation() {
        let errs =
            parse_config_text(ExperimentKind::Harnack, "experiment = simulate\n").unwrap_err();
        assert!(errs[0].message.contains("invocation runs"));
    }

    #[test]
    fn subdir_must_be_a_plain_name() {
        assert!(parse_config_text(ExperimentKind::Simulate, "[run]\nsubdir = ok_name\n").is_ok());
        assert!(
            parse_config_text(ExperimentKind::Simulate, "[run]\nsubdir = ../esc\n").is_err()
        );
        assert!(parse_config_text(ExperimentKind::Simulate, "[run]\nsubdir = a/b\n").is_err());
    }

    #[test]
    fn canonical_json_round_trips_stably() {
        let a = RunConfig::defaults(ExperimentKind::Barrier).canonical_json();
        let b = RunConfig::defaults(ExperimentKind::Barrier).canonical_json();
        assert_eq!(a, b);
        assert!(a.contains("\"experiment\": \"barrier\""));
    }
}
