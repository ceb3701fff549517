//! Truncated Holder seminorms in the boundary-joining metric.
//!
//! The truncated seminorm of a sampled function is the supremum of
//! `|v(p) - v(q)| / d(p, q)^alpha` over sample pairs with `d(p, q)` above a
//! truncation radius; pairs below the radius carry no information at the
//! working flatness and are excluded.  Multi-valued samples contribute their
//! worst selection, and any empty sample makes the seminorm infinite.

use crate::error::{CoreError, Result};
use crate::metric::{metric_d, ParabolicPoint};
use crate::mval::Mval;
use alloc::format;
use alloc::vec::Vec;

/// Result of a truncated seminorm evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormReport {
    /// The seminorm value (possibly `+inf` when a sample is empty).
    pub value: f64,
    /// Holder exponent used.
    pub exponent: f64,
    /// Truncation radius: pairs at distance `<= truncation` are skipped.
    pub truncation: f64,
    /// Number of pairs that entered the supremum.
    pub pairs_used: usize,
    /// Indices of the pair achieving the supremum, if any pair was used.
    pub witness: Option<(usize, usize)>,
}

/// Largest absolute difference over selections from two interval samples.
fn worst_selection(a: &Mval, b: &Mval) -> Option<f64> {
    match (a, b) {
        (Mval::Iv { lo: al, hi: ah }, Mval::Iv { lo: bl, hi: bh }) => {
            Some((ah - bl).max(bh - al).max(0.0))
        }
        _ => None,
    }
}

/// Truncated Holder seminorm over multi-valued samples at parabolic events.
///
/// `lateral_period`, when given, identifies lateral coordinates modulo the
/// period: each pair is measured to the nearest lateral image, which is the
/// quotient metric on a periodic domain.
pub fn trunc_holder(
    points: &[ParabolicPoint],
    values: &[Mval],
    alpha: f64,
    truncation: f64,
    lateral_period: Option<f64>,
) -> Result<SeminormReport> {
    if points.len() != values.len() {
        return Err(CoreError::Invalid {
            what: "seminorm input",
            detail: format!("{} points vs {} values", points.len(), values.len()),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CoreError::Invalid {
            what: "seminorm exponent",
            detail: format!("alpha {alpha} must lie in (0, 1]"),
        });
    }
    if !(truncation >= 0.0) {
        return Err(CoreError::Invalid {
            what: "seminorm truncation",
            detail: format!("truncation {truncation} must be nonnegative"),
        });
    }

    if values.iter().any(Mval::is_empty) {
        return Ok(SeminormReport {
            value: f64::INFINITY,
            exponent: alpha,
            truncation,
            pairs_used: 0,
            witness: None,
        });
    }

    let mut value = 0.0f64;
    let mut witness = None;
    let mut pairs_used = 0usize;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let mut q = points[j];
            if let Some(period) = lateral_period {
                let mut dx = (q.x - points[i].x) % period;
                if dx < -period / 2.0 {
                    dx += period;
                } else if dx >= period / 2.0 {
                    dx -= period;
                }
                q.x = points[i].x + dx;
            }
            let d = metric_d(&points[i], &q);
            if d <= truncation {
                continue;
            }
            pairs_used += 1;
            let diff = worst_selection(&values[i], &values[j]).unwrap_or(f64::INFINITY);
            let ratio = diff / libm::pow(d, alpha);
            if ratio > value {
                value = ratio;
                witness = Some((i, j));
            }
        }
    }

    Ok(SeminormReport {
        value,
        exponent: alpha,
        truncation,
        pairs_used,
        witness,
    })
}

/// Convenience wrapper for single-valued samples.
pub fn trunc_holder_scalar(
    points: &[ParabolicPoint],
    values: &[f64],
    alpha: f64,
    truncation: f64,
    lateral_period: Option<f64>,
) -> Result<SeminormReport> {
    let mv: Vec<Mval> = values.iter().map(|&v| Mval::singleton(v)).collect();
    trunc_holder(points, &mv, alpha, truncation, lateral_period)
}
