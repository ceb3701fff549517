//! Lattice verifiers for the three one-dimensional interpolation facts the
//! regularity argument leans on: a maximum principle driven by second
//! differences, an interpolation bound for first difference quotients, and
//! a Holder estimate for the derivative of a function with controlled
//! difference quotients.
//!
//! Each verifier is exhaustive over its lattice: hypotheses and conclusions
//! are both evaluated, the implication is reported, and any violation
//! carries a concrete witness node.  Samples live on the uniform lattice
//! over `[-1, 1]` and may be interval-valued; a selection-worst convention
//! makes every bound conservative for multi-valued data.

use crate::error::{CoreError, Result};
use crate::mval::Mval;
use alloc::format;
use alloc::vec::Vec;

/// Lattice geometry shared by the verifiers: `n + 1` nodes on `[-1, 1]`.
fn lattice_spacing(len: usize) -> Result<f64> {
    if len < 5 {
        return Err(CoreError::Invalid {
            what: "verifier lattice",
            detail: format!("{len} nodes; need at least 5"),
        });
    }
    Ok(2.0 / (len - 1) as f64)
}

fn require_nonempty(values: &[Mval]) -> Result<()> {
    if values.iter().any(Mval::is_empty) {
        return Err(CoreError::Invalid {
            what: "verifier sample",
            detail: "empty value at a lattice node".into(),
        });
    }
    Ok(())
}

/// Largest `|a - b|` over selections from two interval values.
fn worst_abs_diff(a: &Mval, b: &Mval) -> f64 {
    match (a.lo(), a.hi(), b.lo(), b.hi()) {
        (Some(al), Some(ah), Some(bl), Some(bh)) => (ah - bl).max(bh - al).max(0.0),
        _ => f64::INFINITY,
    }
}

/// Interval of the second difference `v(x+h) + v(x-h) - 2 v(x)` over
/// selections; returns `(lo, hi)`.
fn second_difference(arm_lo: &Mval, center: &Mval, arm_hi: &Mval) -> (f64, f64) {
    let lo = arm_lo.lo().unwrap() + arm_hi.lo().unwrap() - 2.0 * center.hi().unwrap();
    let hi = arm_lo.hi().unwrap() + arm_hi.hi().unwrap() - 2.0 * center.lo().unwrap();
    (lo, hi)
}

/// Outcome of the second-difference maximum principle check.
#[derive(Debug, Clone)]
pub struct MaxPrincipleReport {
    /// Both boundary samples reach down to zero or below.
    pub boundary_ok: bool,
    /// Every admissible second difference stays in `[-1, inf)`.
    pub curvature_ok: bool,
    /// `v <= 1` holds on the inner region `[-1 + h0, 1 - h0]`.
    pub conclusion_ok: bool,
    /// The theorem under test: hypotheses imply the conclusion.
    pub implication_ok: bool,
    /// `(node, step in lattice cells, violating low value)` for the worst
    /// curvature violation, when one exists.
    pub curvature_witness: Option<(usize, usize, f64)>,
    /// `(node, value)` of the worst conclusion violation, when one exists.
    pub conclusion_witness: Option<(usize, f64)>,
    /// Number of lattice steps scanned.
    pub steps_scanned: usize,
}

/// Checks the discrete maximum principle: if the boundary values dip to
/// zero and every second difference over steps `h` in the closed range
/// `[h0, 1]` stays above `-1`, then the sample stays below `1` on
/// `[-1 + h0, 1 - h0]`.
///
/// The step range is closed on both ends deliberately: the step `h = h0`
/// is the only constraint that reaches from the inner-region edge
/// `x = 1 - h0` to the boundary node, and `h = 1` is the only one joining
/// the center to both boundary nodes at once.  Dropping either endpoint
/// admits single-node spikes that defeat the principle.
pub fn verify_max_principle(values: &[Mval], h0: f64) -> Result<MaxPrincipleReport> {
    let h_lat = lattice_spacing(values.len())?;
    require_nonempty(values)?;
    if !(h0 > 0.0 && h0 <= 1.0) {
        return Err(CoreError::Invalid {
            what: "inner margin",
            detail: format!("h0 = {h0} must lie in (0, 1]"),
        });
    }
    if h0 < h_lat - 1e-12 {
        return Err(CoreError::Invalid {
            what: "inner margin",
            detail: format!("h0 = {h0} under the lattice spacing {h_lat}"),
        });
    }
    let n = values.len();
    let node = |i: usize| -1.0 + i as f64 * h_lat;

    let boundary_ok =
        values[0].lo().unwrap() <= 0.0 + 1e-12 && values[n - 1].lo().unwrap() <= 0.0 + 1e-12;

    let m_lo = libm::ceil(h0 / h_lat - 1e-9) as usize;
    let m_hi = libm::floor(1.0 / h_lat + 1e-9) as usize;
    let mut curvature_ok = true;
    let mut curvature_witness: Option<(usize, usize, f64)> = None;
    let mut steps_scanned = 0usize;
    for m in m_lo..=m_hi {
        steps_scanned += 1;
        for i in m..n - m {
            let (lo, _) = second_difference(&values[i - m], &values[i], &values[i + m]);
            if lo < -1.0 - 1e-12 {
                curvature_ok = false;
                match curvature_witness {
                    Some((_, _, worst)) if worst <= lo => {}
                    _ => curvature_witness = Some((i, m, lo)),
                }
            }
        }
    }

    let mut conclusion_ok = true;
    let mut conclusion_witness: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if libm::fabs(node(i)) <= 1.0 - h0 + 1e-12 {
            let hi = v.hi().unwrap();
            if hi > 1.0 + 1e-12 {
                conclusion_ok = false;
                match conclusion_witness {
                    Some((_, worst)) if worst >= hi => {}
                    _ => conclusion_witness = Some((i, hi)),
                }
            }
        }
    }

    Ok(MaxPrincipleReport {
        boundary_ok,
        curvature_ok,
        conclusion_ok,
        implication_ok: !(boundary_ok && curvature_ok) || conclusion_ok,
        curvature_witness,
        conclusion_witness,
        steps_scanned,
    })
}

/// Default bound for the interpolation ratio at total exponent `g`: a
/// telescoping sum over dyadic step halvings contributes the geometric
/// factor `1 / (1 - 2^-(1-g))`, and the remaining direct comparisons cost
/// a fixed factor 8.
pub fn interpolation_bound(g: f64) -> f64 {
    8.0 + 1.0 / (1.0 - libm::pow(2.0, -(1.0 - g)))
}

/// Outcome of the difference-quotient interpolation check.
#[derive(Debug, Clone)]
pub struct InterpolationReport {
    /// Sup over steps in `(h0, 2)` of the first-quotient norm.
    pub lhs: f64,
    /// Oscillation plus sup over steps in `(h0, 1)` of the
    /// second-quotient norm.
    pub rhs: f64,
    /// `lhs / rhs`, zero when both vanish.
    pub ratio: f64,
    /// Bound the ratio is compared against.
    pub bound: f64,
    /// Whether the ratio respects the bound.
    pub ok: bool,
}

/// Measures the interpolation inequality: first difference quotients at
/// exponent `alpha + beta` are controlled by the oscillation plus second
/// difference quotients at the same exponent.
///
/// `lhs = sup over lattice h in (h0, 2) of max |v(y + h) - v(y)| / h^g`
/// with both endpoints in `[-1, 1]`;
/// `rhs = osc(v) + sup over lattice h in (h0, 1) of
/// max |v(x+h) + v(x-h) - 2 v(x)| / h^g` with `x` at distance `h` from
/// the ends; `g = alpha + beta < 1`.
pub fn verify_quotient_interpolation(
    values: &[Mval],
    alpha: f64,
    beta: f64,
    h0: f64,
    bound: Option<f64>,
) -> Result<InterpolationReport> {
    let h_lat = lattice_spacing(values.len())?;
    require_nonempty(values)?;
    let g = alpha + beta;
    if !(alpha > 0.0 && beta >= 0.0 && g < 1.0) {
        return Err(CoreError::Invalid {
            what: "interpolation exponents",
            detail: format!("alpha = {alpha}, beta = {beta} need alpha > 0, beta >= 0, sum < 1"),
        });
    }
    if !(h0 >= 0.0) {
        return Err(CoreError::Invalid {
            what: "step floor",
            detail: format!("h0 = {h0} must be nonnegative"),
        });
    }
    let n = values.len();

    let mut lhs = 0.0f64;
    for m in 1..n {
        let h = m as f64 * h_lat;
        if h <= h0 || h >= 2.0 - 1e-12 {
            continue;
        }
        let scale = libm::pow(h, -g);
        for i in 0..n - m {
            let q = worst_abs_diff(&values[i + m], &values[i]) * scale;
            if q > lhs {
                lhs = q;
            }
        }
    }

    let mut osc_lo = f64::INFINITY;
    let mut osc_hi = f64::NEG_INFINITY;
    for v in values {
        osc_lo = osc_lo.min(v.lo().unwrap());
        osc_hi = osc_hi.max(v.hi().unwrap());
    }
    let mut second_sup = 0.0f64;
    for m in 1..n {
        let h = m as f64 * h_lat;
        if h <= h0 || h >= 1.0 + 1e-12 {
            continue;
        }
        let scale = libm::pow(h, -g);
        for i in m..n - m {
            let (lo, hi) = second_difference(&values[i - m], &values[i], &values[i + m]);
            let q = libm::fabs(lo).max(libm::fabs(hi)) * scale;
            if q > second_sup {
                second_sup = q;
            }
        }
    }
    let rhs = (osc_hi - osc_lo) + second_sup;

    let scale_ref = osc_hi.abs().max(osc_lo.abs()).max(1.0);
    let ratio = if rhs <= 1e-14 * scale_ref { 0.0 } else { lhs / rhs };
    let bound = bound.unwrap_or_else(|| interpolation_bound(g));
    Ok(InterpolationReport {
        lhs,
        rhs,
        ratio,
        bound,
        ok: ratio <= bound,
    })
}

/// Bound for the derivative Holder estimate at total exponent
/// `alpha + beta > 1`: dyadic refinement of the difference quotient
/// toward the derivative converges geometrically with ratio
/// `2^-(alpha + beta - 1)`, and summing the tail gives
/// `4 / (2^(alpha+beta-1) - 1)`.
pub fn derivative_bound(alpha: f64, beta: f64) -> f64 {
    4.0 / (libm::pow(2.0, alpha + beta - 1.0) - 1.0)
}

/// Outcome of the derivative Holder check.
#[derive(Debug, Clone)]
pub struct DerivativeHolderReport {
    /// Measured hypothesis quantity: sup over steps of the `C^alpha` norm
    /// of the step quotient at exponent `beta`.
    pub hypothesis_value: f64,
    /// Whether the hypothesis quantity is within 1 (plus tolerance).
    pub hypothesis_ok: bool,
    /// Holder seminorm of the lattice derivative at exponent
    /// `alpha + beta - 1`.
    pub derivative_seminorm: f64,
    /// Bound on the conclusion.
    pub bound: f64,
    /// False when the hypothesis failed, making the check inconclusive
    /// rather than a counterexample.
    pub conclusive: bool,
    /// Conclusion verdict (true whenever inconclusive).
    pub ok: bool,
}

/// Verifies the derivative Holder estimate: if every step quotient
/// `delta_h v / h^beta` has `C^alpha` norm at most 1, the lattice
/// derivative of `v` has `C^(alpha+beta-1)` seminorm at most
/// `4 / (2^(alpha+beta-1) - 1)` plus the configured lattice slack.
///
/// The hypothesis is measured first (centered quotients at even lattice
/// steps, norm = sup + seminorm over quotient centers); when it exceeds 1
/// the report is inconclusive.  The derivative is the forward quotient at
/// the finest step, seminormed over cell midpoints.
pub fn verify_derivative_holder(
    values: &[f64],
    alpha: f64,
    beta: f64,
    slack: f64,
) -> Result<DerivativeHolderReport> {
    let h_lat = lattice_spacing(values.len())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Invalid {
            what: "verifier sample",
            detail: "non-finite value".into(),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0 && alpha + beta > 1.0) {
        return Err(CoreError::Invalid {
            what: "derivative exponents",
            detail: format!(
                "alpha = {alpha}, beta = {beta} need both in (0, 1] with sum above 1"
            ),
        });
    }
    if !(slack >= 0.0) {
        return Err(CoreError::Invalid {
            what: "lattice slack",
            detail: format!("{slack} must be nonnegative"),
        });
    }
    let n = values.len();

    // Hypothesis: for each even step 2l cells, the quotient field lives on
    // centers i + l; measure sup plus Holder-alpha seminorm.
    let mut hypothesis_value = 0.0f64;
    for l in 1..(n - 1) / 2 + 1 {
        let h = 2.0 * l as f64 * h_lat;
        if h >= 2.0 - 1e-12 {
            break;
        }
        let scale = libm::pow(h, -beta);
        let centers = n - 2 * l;
        if centers < 2 {
            break;
        }
        let field: Vec<f64> = (0..centers)
            .map(|i| (values[i + 2 * l] - values[i]) * scale)
            .collect();
        let mut norm = 0.0f64;
        for (i, fi) in field.iter().enumerate() {
            let a = libm::fabs(*fi);
            if a > norm {
                norm = a;
            }
            for (j, fj) in field.iter().enumerate().skip(i + 1) {
                let d = (j - i) as f64 * h_lat;
                let q = libm::fabs(fi - fj) / libm::pow(d, alpha);
                if q > norm {
                    norm = q;
                }
            }
        }
        if norm > hypothesis_value {
            hypothesis_value = norm;
        }
    }
    let hypothesis_ok = hypothesis_value <= 1.0 + 1e-9;

    // Conclusion: forward quotients at the finest step, seminormed at
    // exponent alpha + beta - 1 over cell midpoints.
    let gamma = alpha + beta - 1.0;
    let deriv: Vec<f64> = (0..n - 1)
        .map(|i| (values[i + 1] - values[i]) / h_lat)
        .collect();
    let mut seminorm = 0.0f64;
    for i in 0..deriv.len() {
        for j in i + 1..deriv.len() {
            let d = (j - i) as f64 * h_lat;
            let q = libm::fabs(deriv[i] - deriv[j]) / libm::pow(d, gamma);
            if q > seminorm {
                seminorm = q;
            }
        }
    }

    let bound = derivative_bound(alpha, beta);
    let conclusive = hypothesis_ok;
    let ok = !conclusive || seminorm <= bound + slack;
    Ok(DerivativeHolderReport {
        hypothesis_value,
        hypothesis_ok,
        derivative_seminorm: seminorm,
        bound,
        conclusive,
        ok,
    })
}
