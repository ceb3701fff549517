//! The boundary-joining parabolic metric on the closed upper half plane
//! times negative time.
//!
//! Two events at the same time are compared with the plain Euclidean
//! distance.  Two events at different times can only be joined through the
//! lateral boundary: the distance is the infimum over boundary waypoints
//! `z`, `w` of
//!
//! ```text
//! |(x, xn) - (z, 0)|  +  |(z, t) - (w, s)|  +  |(w, 0) - (y, yn)|
//! ```
//!
//! where the middle leg lives in the lateral-time plane.  The metric is
//! 1-homogeneous under joint parabolic scaling of space and time, and for
//! two boundary events it collapses to the closed form
//! `sqrt(|x - y|^2 + (t - s)^2)`.

use crate::error::{CoreError, Result};
use alloc::format;

/// One space-time event: lateral coordinate `x`, height `xn >= 0` above the
/// boundary, time `t <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPoint {
    /// Lateral coordinate.
    pub x: f64,
    /// Height above the boundary; nonnegative.
    pub xn: f64,
    /// Time; nonpositive (the final time is the origin).
    pub t: f64,
}

impl ParabolicPoint {
    /// Validating constructor.
    pub fn new(x: f64, xn: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && xn.is_finite() && t.is_finite()) || xn < 0.0 || t > 0.0 {
            return Err(CoreError::Invalid {
                what: "parabolic point",
                detail: format!("({x}, {xn}, {t}) requires finite coordinates, xn >= 0, t <= 0"),
            });
        }
        Ok(Self { x, xn, t })
    }

    /// Boundary event at height zero.
    pub fn boundary(x: f64, t: f64) -> Result<Self> {
        Self::new(x, 0.0, t)
    }
}

/// Length of the boundary-joined path through waypoints `z`, `w`.
fn joined_length(p: &ParabolicPoint, q: &ParabolicPoint, z: f64, w: f64) -> f64 {
    let dt = p.t - q.t;
    libm::hypot(p.x - z, p.xn) + libm::hypot(z - w, dt) + libm::hypot(w - q.x, q.xn)
}

/// Boundary-to-boundary closed form: the straight segment in the
/// lateral-time plane is the optimal joined path.
pub fn boundary_distance(x: f64, t: f64, y: f64, s: f64) -> f64 {
    libm::hypot(x - y, t - s)
}

/// The boundary-joining parabolic distance between two events.
///
/// Same-time pairs use the Euclidean distance; boundary pairs use the
/// closed form; interior pairs at different times minimize the joined path
/// over waypoints with a 64 x 64 coarse scan refined by a shrinking
/// eight-direction pattern search (the objective is convex, so the local
/// polish is global).  Relative accuracy is well below 1e-6.
pub fn metric_d(p: &ParabolicPoint, q: &ParabolicPoint) -> f64 {
    if p.t == q.t {
        return libm::hypot(p.x - q.x, p.xn - q.xn);
    }
    if p.xn == 0.0 && q.xn == 0.0 {
        return boundary_distance(p.x, p.t, q.x, q.t);
    }

    // The optimal waypoints lie in the lateral interval spanned by the two
    // events: sliding a waypoint toward that interval shortens both legs
    // that touch it.
    let lo = p.x.min(q.x);
    let hi = p.x.max(q.x);
    let scale = (hi - lo)
        .max(p.xn)
        .max(q.xn)
        .max(libm::fabs(p.t - q.t))
        .max(f64::MIN_POSITIVE);
    let span = (hi - lo).max(1e-6 * scale);

    const COARSE: usize = 64;
    let mut best = (p.x, q.x, joined_length(p, q, p.x, q.x));
    for iz in 0..=COARSE {
        let z = lo + span * iz as f64 / COARSE as f64;
        for iw in 0..=COARSE {
            let w = lo + span * iw as f64 / COARSE as f64;
            let v = joined_length(p, q, z, w);
            if v < best.2 {
                best = (z, w, v);
            }
        }
    }

    let mut step = span / COARSE as f64;
    let (mut z, mut w, mut val) = best;
    let dirs: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ];
    while step > 1e-13 * scale {
        let mut improved = false;
        for (dz, dw) in dirs {
            let (cz, cw) = (z + dz * step, w + dw * step);
            let v = joined_length(p, q, cz, cw);
            if v < val {
                z = cz;
                w = cw;
                val = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    val
}
