//! Multi-valued samples and their interval calculus.
//!
//! A hodograph of a one-phase solution can be set-valued where the level
//! line meets the solution in more than one point, and empty where it meets
//! none.  A sample is therefore a closed interval `[lo, hi]` (singletons
//! have `lo == hi`) or the empty marker.  Arithmetic is Minkowski interval
//! arithmetic, and by convention any quantity ranging over an empty sample
//! is infinite: empty values poison oscillations and norms to `+inf`.

use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec::Vec;

/// One multi-valued sample: a closed interval or the empty marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mval {
    /// No value at this node.
    Empty,
    /// The closed interval `[lo, hi]`; singletons have `lo == hi`.
    Iv {
        /// Lower endpoint.
        lo: f64,
        /// Upper endpoint.
        hi: f64,
    },
}

impl Mval {
    /// Single-valued sample.
    pub fn singleton(v: f64) -> Self {
        Mval::Iv { lo: v, hi: v }
    }

    /// Interval sample; endpoints must be ordered and finite.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(CoreError::Invalid {
                what: "interval sample",
                detail: format!("endpoints [{lo}, {hi}] must be finite and ordered"),
            });
        }
        Ok(Mval::Iv { lo, hi })
    }

    /// Whether the sample is empty.
    pub fn is_empty(&self) -> bool {
        matches!(self, Mval::Empty)
    }

    /// Lower endpoint, if any.
    pub fn lo(&self) -> Option<f64> {
        match self {
            Mval::Empty => None,
            Mval::Iv { lo, .. } => Some(*lo),
        }
    }

    /// Upper endpoint, if any.
    pub fn hi(&self) -> Option<f64> {
        match self {
            Mval::Empty => None,
            Mval::Iv { hi, .. } => Some(*hi),
        }
    }

    /// Interval width; empty samples have width `+inf` by the convention above.
    pub fn width(&self) -> f64 {
        match self {
            Mval::Empty => f64::INFINITY,
            Mval::Iv { lo, hi } => hi - lo,
        }
    }

    /// Minkowski sum.
    pub fn add(self, rhs: Mval) -> Mval {
        match (self, rhs) {
            (Mval::Iv { lo: a, hi: b }, Mval::Iv { lo: c, hi: d }) => {
                Mval::Iv { lo: a + c, hi: b + d }
            }
            _ => Mval::Empty,
        }
    }

    /// Minkowski difference `self - rhs` (every selection of the operands).
    pub fn sub(self, rhs: Mval) -> Mval {
        match (self, rhs) {
            (Mval::Iv { lo: a, hi: b }, Mval::Iv { lo: c, hi: d }) => {
                Mval::Iv { lo: a - d, hi: b - c }
            }
            _ => Mval::Empty,
        }
    }

    /// Scales by a real factor (which may flip the endpoints).
    pub fn scale(self, s: f64) -> Mval {
        match self {
            Mval::Empty => Mval::Empty,
            Mval::Iv { lo, hi } => {
                if s >= 0.0 {
                    Mval::Iv { lo: s * lo, hi: s * hi }
                } else {
                    Mval::Iv { lo: s * hi, hi: s * lo }
                }
            }
        }
    }

    /// Convex hull of two samples; the hull with an empty sample is the
    /// other sample (hull of roots, not Minkowski arithmetic).
    pub fn hull(self, rhs: Mval) -> Mval {
        match (self, rhs) {
            (Mval::Empty, v) | (v, Mval::Empty) => v,
            (Mval::Iv { lo: a, hi: b }, Mval::Iv { lo: c, hi: d }) => Mval::Iv {
                lo: a.min(c),
                hi: b.max(d),
            },
        }
    }

    /// Largest absolute value over the sample; `+inf` for empty samples.
    pub fn abs_sup(&self) -> f64 {
        match self {
            Mval::Empty => f64::INFINITY,
            Mval::Iv { lo, hi } => libm::fabs(*lo).max(libm::fabs(*hi)),
        }
    }
}

/// Oscillation (`sup - inf`) of a collection of samples.
///
/// Any empty sample makes the oscillation `+inf`; an empty collection has
/// oscillation zero.
pub fn oscillation<'a, I: IntoIterator<Item = &'a Mval>>(samples: I) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut any = false;
    for s in samples {
        any = true;
        match s {
            Mval::Empty => return f64::INFINITY,
            Mval::Iv { lo: a, hi: b } => {
                lo = lo.min(*a);
                hi = hi.max(*b);
            }
        }
    }
    if any {
        hi - lo
    } else {
        0.0
    }
}

/// Sup norm of a collection of samples; `+inf` if any sample is empty.
pub fn linf_norm<'a, I: IntoIterator<Item = &'a Mval>>(samples: I) -> f64 {
    let mut m: f64 = 0.0;
    for s in samples {
        m = m.max(s.abs_sup());
        if m.is_infinite() {
            return f64::INFINITY;
        }
    }
    m
}

/// Centered difference quotient data: values live on midpoints shifted by
/// `offset` from the input lattice.
#[derive(Debug, Clone)]
pub struct DiffQuotient<T> {
    /// Difference values `v(x + h/2) - v(x - h/2)` sampled at `x = x_i + offset`.
    pub values: Vec<T>,
    /// Shift of the sample points relative to input node `i`.
    pub offset: f64,
    /// The step as a lattice multiple.
    pub m: usize,
}

fn lattice_steps(h_lattice: f64, h: f64) -> Result<usize> {
    let ratio = h / h_lattice;
    let m = libm::round(ratio);
    if !(h_lattice > 0.0) || m < 1.0 || libm::fabs(ratio - m) > 1e-9 * ratio.max(1.0) {
        return Err(CoreError::NotLatticeMultiple {
            requested: h,
            lattice: h_lattice,
        });
    }
    Ok(m as usize)
}

/// Centered difference `v(x + h/2) - v(x - h/2)` of a periodic single-valued
/// row.  `h` must be a lattice multiple; entry `i` is sampled at `x_i + h/2`.
pub fn diff_quotient_periodic(v: &[f64], h_lattice: f64, h: f64) -> Result<DiffQuotient<f64>> {
    let m = lattice_steps(h_lattice, h)?;
    let n = v.len();
    let values = (0..n).map(|i| v[(i + m) % n] - v[i]).collect();
    Ok(DiffQuotient {
        values,
        offset: 0.5 * h,
        m,
    })
}

/// Centered difference of a bounded single-valued row; the domain shrinks by
/// `m` nodes at the right end.
pub fn diff_quotient_bounded(v: &[f64], h_lattice: f64, h: f64) -> Result<DiffQuotient<f64>> {
    let m = lattice_steps(h_lattice, h)?;
    if v.len() <= m {
        return Err(CoreError::Unresolved {
            what: "difference quotient",
            detail: format!("row of {} nodes cannot take a {m}-step difference", v.len()),
        });
    }
    let values = (0..v.len() - m).map(|i| v[i + m] - v[i]).collect();
    Ok(DiffQuotient {
        values,
        offset: 0.5 * h,
        m,
    })
}

/// Centered difference of a bounded multi-valued row (Minkowski semantics).
pub fn diff_quotient_mv(v: &[Mval], h_lattice: f64, h: f64) -> Result<DiffQuotient<Mval>> {
    let m = lattice_steps(h_lattice, h)?;
    if v.len() <= m {
        return Err(CoreError::Unresolved {
            what: "difference quotient",
            detail: format!("row of {} nodes cannot take a {m}-step difference", v.len()),
        });
    }
    let values = (0..v.len() - m).map(|i| v[i + m].sub(v[i])).collect();
    Ok(DiffQuotient {
        values,
        offset: 0.5 * h,
        m,
    })
}

/// Second centered difference `v(x + h) - 2 v(x) + v(x - h)` of a bounded
/// multi-valued row, sampled at the original nodes `m..len-m`.
pub fn second_quotient_mv(v: &[Mval], h_lattice: f64, h: f64) -> Result<DiffQuotient<Mval>> {
    let m = lattice_steps(h_lattice, h)?;
    if v.len() < 2 * m + 1 {
        return Err(CoreError::Unresolved {
            what: "second difference quotient",
            detail: format!(
                "row of {} nodes cannot take a centered {m}-step second difference",
                v.len()
            ),
        });
    }
    let values = (m..v.len() - m)
        .map(|i| v[i + m].add(v[i - m]).sub(v[i].scale(2.0)))
        .collect();
    Ok(DiffQuotient {
        values,
        offset: 0.0,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_sub_spans_selections() {
        let a = Mval::interval(1.0, 2.0).unwrap();
        let b = Mval::interval(-1.0, 3.0).unwrap();
        assert_eq!(a.sub(b), Mval::Iv { lo: -2.0, hi: 3.0 });
    }

    #[test]
    fn empty_poisons_norms() {
        let row = [Mval::singleton(1.0), Mval::Empty];
        assert!(oscillation(row.iter()).is_infinite());
        assert!(linf_norm(row.iter()).is_infinite());
    }

    #[test]
    fn quotient_of_linear_row_is_constant() {
        let h = 0.5;
        let v: Vec<f64> = (0..8).map(|i| 3.0 * (i as f64) * h).collect();
        let d = diff_quotient_bounded(&v, h, 2.0 * h).unwrap();
        assert!(d.values.iter().all(|q| (q - 3.0).abs() < 1e-12));
        assert_eq!(d.offset, h);
    }

    #[test]
    fn non_lattice_step_is_rejected_with_remediation() {
        let v = [0.0; 8];
        let err = diff_quotient_bounded(&v, 0.5, 0.75).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("choose h = m *"));
    }

    #[test]
    fn second_quotient_of_parabola_matches_curvature() {
        let h = 0.25;
        let v: Vec<Mval> = (0..16)
            .map(|i| {
                let x = i as f64 * h;
                Mval::singleton(x * x)
            })
            .collect();
        let d2 = second_quotient_mv(&v, h, 2.0 * h).unwrap();
        for q in &d2.values {
            let w = q.lo().unwrap();
            assert!((w - 2.0 * (2.0 * h) * (2.0 * h)).abs() < 1e-12);
        }
    }
}
