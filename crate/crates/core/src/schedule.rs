//! Piecewise-constant influx schedules `a(t)` and their running integrals.
//!
//! The bottom influx drives both the simulator and the spectral evolution,
//! so the schedule is shared: it is right-continuous, defined from its first
//! breakpoint onward, and its integral `A(t)` is computed exactly piece by
//! piece (no quadrature error for piecewise-constant data).

use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Right-continuous piecewise-constant schedule: value `values[i]` holds on
/// `[starts[i], starts[i+1])`, and `values.last()` from the last start onward.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    starts: Vec<f64>,
    values: Vec<f64>,
}

impl Schedule {
    /// Builds a schedule from `(start, value)` breakpoints.
    ///
    /// Starts must be finite and strictly increasing; values must be finite
    /// and nonnegative (an influx never reverses, and indicator schedules
    /// take the value zero).  Callers needing strict positivity layer
    /// [`Schedule::check_bounds`] on top.
    pub fn new(breakpoints: &[(f64, f64)]) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(CoreError::Invalid {
                what: "schedule",
                detail: "at least one breakpoint required".into(),
            });
        }
        for w in breakpoints.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(CoreError::Invalid {
                    what: "schedule",
                    detail: format!("breakpoint times must strictly increase: {} then {}", w[0].0, w[1].0),
                });
            }
        }
        for &(t, v) in breakpoints {
            if !t.is_finite() || !v.is_finite() || !(v >= 0.0) {
                return Err(CoreError::Invalid {
                    what: "schedule",
                    detail: format!("breakpoint ({t}, {v}) must be finite with nonnegative value"),
                });
            }
        }
        Ok(Self {
            starts: breakpoints.iter().map(|b| b.0).collect(),
            values: breakpoints.iter().map(|b| b.1).collect(),
        })
    }

    /// Constant schedule `a(t) = a` from time zero.
    pub fn constant(a: f64) -> Result<Self> {
        Self::new(&[(0.0, a)])
    }

    /// First defined time.
    pub fn start(&self) -> f64 {
        self.starts[0]
    }

    /// Breakpoint times.
    pub fn breakpoints(&self) -> &[f64] {
        &self.starts
    }

    /// Value at time `t` (right-continuous; clamps to the first piece before
    /// the domain start).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.starts.partition_point(|&s| s <= t) {
            0 => self.values[0],
            i => self.values[i - 1],
        }
    }

    /// Largest value over all pieces.
    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Smallest value over all pieces.
    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Checks every piece lies within `[lo, hi]`.
    pub fn check_bounds(&self, lo: f64, hi: f64) -> Result<()> {
        for &v in &self.values {
            if v < lo || v > hi {
                return Err(CoreError::Invalid {
                    what: "schedule",
                    detail: format!("influx value {v} outside configured bounds [{lo}, {hi}]"),
                });
            }
        }
        Ok(())
    }

    /// Exact integral of the schedule over `[t0, t1]` (sign-aware).
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 < t0 {
            return -self.integral(t1, t0);
        }
        let mut acc = 0.0;
        let mut lo = t0;
        for i in 0..self.values.len() {
            let seg_end = if i + 1 < self.starts.len() {
                self.starts[i + 1]
            } else {
                f64::INFINITY
            };
            if lo >= t1 {
                break;
            }
            if seg_end <= lo {
                continue;
            }
            let hi = seg_end.min(t1);
            acc += self.values[i] * (hi - lo);
            lo = hi;
        }
        acc
    }

    /// Times in `[t0, t1)` where the schedule value jumps.
    pub fn jumps_within(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.starts
            .iter()
            .skip(1)
            .copied()
            .filter(|&s| s > t0 && s < t1)
            .collect()
    }

    /// Restricts to a piecewise-constant indicator-style schedule sampled on a
    /// uniform lattice of `n` cells over `[t0, t1]`; used by barrier drivers.
    pub fn sample_cells(&self, t0: f64, t1: f64, n: usize) -> Vec<f64> {
        let dt = (t1 - t0) / n as f64;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value_at(t0 + (i as f64 + 0.5) * dt);
        }
        out
    }
}
