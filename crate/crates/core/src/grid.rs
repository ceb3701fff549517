//! Sample lattices: the periodic lateral grid and the mapped strip grid.

use crate::error::{CoreError, Result};
use alloc::format;
use core::f64::consts::TAU;

/// Uniform periodic lattice on `[0, len)`.
///
/// The node count must be a power of two (the spectral operators use a
/// radix-2 FFT) and at least 8 so every dispersion experiment resolves a few
/// modes above the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid1D {
    n: usize,
    len: f64,
}

impl PeriodicGrid1D {
    /// Creates a periodic lattice with `n` nodes on `[0, len)`.
    pub fn new(n: usize, len: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(CoreError::Invalid {
                what: "periodic grid",
                detail: format!("node count {n} must be a power of two >= 8"),
            });
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(CoreError::Invalid {
                what: "periodic grid",
                detail: format!("period {len} must be finite and positive"),
            });
        }
        Ok(Self { n, len })
    }

    /// Creates a lattice with the default period `2 pi`.
    pub fn with_default_length(n: usize) -> Result<Self> {
        Self::new(n, TAU)
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Period length.
    pub fn len(&self) -> f64 {
        self.len
    }

    /// Lattice spacing.
    pub fn h(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Coordinate of node `i` (taken modulo `n`).
    pub fn node(&self, i: usize) -> f64 {
        (i % self.n) as f64 * self.h()
    }

    /// Signed wavenumber of FFT bin `m`: bins above `n/2` alias to negative.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let m = m % self.n;
        let k = if m <= self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        k * TAU / self.len
    }

    /// Wraps a coordinate difference to the minimal image in `[-len/2, len/2)`.
    pub fn min_image(&self, dx: f64) -> f64 {
        let mut d = dx % self.len;
        if d < -self.len / 2.0 {
            d += self.len;
        } else if d >= self.len / 2.0 {
            d -= self.len;
        }
        d
    }

    /// Checks that `h` is a positive integer multiple of the spacing and
    /// returns the multiplier.
    pub fn lattice_multiple(&self, h: f64) -> Result<usize> {
        let ratio = h / self.h();
        let m = libm::round(ratio);
        if m < 1.0 || libm::fabs(ratio - m) > 1e-9 * ratio.max(1.0) {
            return Err(CoreError::NotLatticeMultiple {
                requested: h,
                lattice: self.h(),
            });
        }
        Ok(m as usize)
    }
}

/// Mapped strip lattice: periodic in `x'`, `ny` cells across the unit depth
/// coordinate `y in [0, 1]` (so `ny + 1` node rows, `y = 1` on the interface).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGrid {
    x: PeriodicGrid1D,
    ny: usize,
}

impl StripGrid {
    /// Creates a strip lattice over the given lateral grid with `ny` depth cells.
    pub fn new(x: PeriodicGrid1D, ny: usize) -> Result<Self> {
        if ny < 8 {
            return Err(CoreError::Invalid {
                what: "strip grid",
                detail: format!("depth cell count {ny} must be >= 8"),
            });
        }
        Ok(Self { x, ny })
    }

    /// Lateral periodic grid.
    pub fn x(&self) -> &PeriodicGrid1D {
        &self.x
    }

    /// Lateral node count.
    pub fn nx(&self) -> usize {
        self.x.n()
    }

    /// Depth cell count (node rows are `0..=ny`).
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Depth spacing of the unit coordinate.
    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    /// Unit depth coordinate of node row `j`.
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    /// Flat index of node `(i, j)` in row-major `j`-outer storage.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }
}
