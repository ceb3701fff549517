//! Consistency check for the potential-theory identity behind the
//! linearized model: the boundary normal derivative of the harmonic
//! extension of a periodic trace equals its half-Laplacian.
//!
//! The extension is computed mode by mode as a two-point boundary value
//! problem in the vertical coordinate: `phi'' = k^2 phi` on a tall strip
//! with the trace value at the bottom and a decay-mimicking Robin
//! condition `phi' = -k phi` at the top, which the half-space profile
//! `exp(-k y)` satisfies exactly, so the strip truncation itself adds no
//! continuum error.  The solver is a second-order finite-difference
//! scheme (ghost-node Robin row, tridiagonal elimination) whose
//! boundary derivative is Richardson-extrapolated across two lattices;
//! the report compares the resulting per-mode decay rates and the
//! synthesized boundary field against the spectral half-Laplacian.

use crate::error::{CoreError, Result};
use crate::fft::{dft_real, idft_real};
use crate::grid::PeriodicGrid1D;
use crate::spectral::half_laplacian;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Outcome of the harmonic-extension consistency check.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    /// Per-mode operator errors `(k, |rate(k) + k|)` for the low modes
    /// (wavenumber magnitude at most `low_mode_cut`).
    pub mode_errors: Vec<(f64, f64)>,
    /// Sup-norm discrepancy between the numerically extended normal
    /// derivative and the spectral half-Laplacian of the trace.
    pub sup_discrepancy: f64,
    /// Absolute tolerance the check was run at.
    pub tolerance: f64,
    /// Strip height used for the extension.
    pub strip_height: f64,
    /// Vertical cells of the fine lattice.
    pub cells: usize,
    /// True when every low-mode error and the field discrepancy pass.
    pub ok: bool,
}

/// Numerical boundary derivative of the vertical profile for wavenumber
/// `k`: solves `phi'' = k^2 phi`, `phi(0) = 1`, `phi'(H) = -k phi(H)`
/// on `cells` intervals and returns the one-sided three-point estimate
/// of `phi'(0)` (exactly `-k` in the continuum).
fn boundary_rate(k: f64, height: f64, cells: usize) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let m = cells;
    let h = height / m as f64;
    let kh2 = k * k * h * h;
    // Unknowns phi_1..phi_m; phi_0 = 1.  Rows:
    //   interior: phi_{j-1} - (2 + k^2 h^2) phi_j + phi_{j+1} = 0
    //   top (ghost eliminated): 2 phi_{m-1} - (2 + k^2 h^2 + 2 h k) phi_m = 0
    let mut diag = vec![-(2.0 + kh2); m];
    let mut rhs = vec![0.0f64; m];
    let mut lower = vec![1.0f64; m];
    let upper = vec![1.0f64; m];
    rhs[0] = -1.0;
    lower[m - 1] = 2.0;
    diag[m - 1] = -(2.0 + kh2 + 2.0 * h * k);
    // Thomas elimination (forward sweep, back substitution).
    for j in 1..m {
        let w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    let mut phi = vec![0.0f64; m];
    phi[m - 1] = rhs[m - 1] / diag[m - 1];
    for j in (0..m - 1).rev() {
        phi[j] = (rhs[j] - upper[j] * phi[j + 1]) / diag[j];
    }
    (-3.0 + 4.0 * phi[0] - phi[1]) / (2.0 * h)
}

/// Richardson-extrapolated boundary rate across the fine lattice and
/// its 2:1 coarsening, eliminating the second-order truncation term.
fn extrapolated_rate(k: f64, height: f64, cells: usize) -> f64 {
    let fine = boundary_rate(k, height, cells);
    let coarse = boundary_rate(k, height, cells / 2);
    (4.0 * fine - coarse) / 3.0
}

/// Runs the harmonic-extension consistency check at the default
/// resolution: strip height 2, 512 vertical cells, tolerance 1e-3.
pub fn harmonic_extension_check(grid: &PeriodicGrid1D, values: &[f64]) -> Result<ExtensionReport> {
    harmonic_extension_check_with(grid, values, 2.0, 512, 1e-3)
}

/// Parameterized form of [`harmonic_extension_check`].
pub fn harmonic_extension_check_with(
    grid: &PeriodicGrid1D,
    values: &[f64],
    height: f64,
    cells: usize,
    tolerance: f64,
) -> Result<ExtensionReport> {
    if values.len() != grid.n() {
        return Err(CoreError::Invalid {
            what: "trace row",
            detail: format!("{} values on a {}-node grid", values.len(), grid.n()),
        });
    }
    if !(height > 0.0 && height.is_finite()) || cells < 16 || cells % 2 != 0 {
        return Err(CoreError::Invalid {
            what: "extension lattice",
            detail: format!("height {height}, cells {cells}: need positive height, even cells >= 16"),
        });
    }
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CoreError::Invalid {
            what: "extension tolerance",
            detail: format!("{tolerance}"),
        });
    }

    // Per-bin decay rates; the rate depends only on |k|, cached by
    // half-spectrum index.
    let n = grid.n();
    let mut abs_rate = vec![0.0f64; n / 2 + 1];
    for (half, rate) in abs_rate.iter_mut().enumerate().skip(1) {
        let k = grid.wavenumber(half);
        debug_assert!(k > 0.0);
        *rate = extrapolated_rate(k, height, cells);
    }

    // Synthesize the numerical normal derivative from the trace spectrum.
    let (mut re, mut im) = dft_real(values)?;
    for m in 0..n {
        let k = grid.wavenumber(m);
        let half = if m <= n / 2 { m } else { n - m };
        debug_assert!((libm::fabs(k) - grid.wavenumber(half)).abs() < 1e-12 || half == 0);
        let rate = abs_rate[half];
        re[m] *= rate;
        im[m] *= rate;
    }
    let numeric = idft_real(&re, &im)?;
    let spectral = half_laplacian(grid, values)?;

    let mut sup = 0.0f64;
    let mut scale = 1.0f64;
    for (a, b) in numeric.iter().zip(spectral.iter()) {
        sup = sup.max(libm::fabs(a - b));
    }
    for v in values {
        scale = scale.max(libm::fabs(*v));
    }

    let low_mode_cut = 8.5 * core::f64::consts::TAU / grid.len();
    let mut mode_errors = Vec::new();
    let mut modes_ok = true;
    for half in 0..=n / 2 {
        let k = grid.wavenumber(half);
        if k <= low_mode_cut {
            let err = libm::fabs(abs_rate[half] + k);
            mode_errors.push((k, err));
            modes_ok &= err <= tolerance;
        }
    }

    let ok = modes_ok && sup <= tolerance * scale;
    Ok(ExtensionReport {
        mode_errors,
        sup_discrepancy: sup,
        tolerance,
        strip_height: height,
        cells,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::TAU;

    fn unit_grid(n: usize) -> PeriodicGrid1D {
        PeriodicGrid1D::new(n, TAU).unwrap()
    }

    #[test]
    fn constant_trace_has_zero_normal_derivative() {
        let grid = unit_grid(64);
        let values = vec![0.75; 64];
        let report = harmonic_extension_check(&grid, &values).unwrap();
        assert!(report.ok);
        assert_eq!(report.mode_errors[0], (0.0, 0.0));
        assert!(report.sup_discrepancy < 1e-12);
    }

    #[test]
    fn single_cosine_reproduces_its_decay_rate() {
        let grid = unit_grid(128);
        let values: Vec<f64> = (0..128).map(|i| libm::cos(grid.node(i))).collect();
        let report = harmonic_extension_check(&grid, &values).unwrap();
        assert!(report.ok, "discrepancy {}", report.sup_discrepancy);
        assert!(report.sup_discrepancy <= 1e-3);
        let k1 = report
            .mode_errors
            .iter()
            .find(|(k, _)| (*k - 1.0).abs() < 1e-12)
            .unwrap();
        assert!(k1.1 < 1e-5, "mode-1 operator error {}", k1.1);
    }

    #[test]
    fn mode_mixture_passes_per_mode_at_default_resolution() {
        let grid = unit_grid(256);
        let values: Vec<f64> = (0..256)
            .map(|i| {
                let x = grid.node(i);
                (1..=8).map(|k| libm::cos(k as f64 * x + 0.3 * k as f64) / k as f64).sum()
            })
            .collect();
        let report = harmonic_extension_check(&grid, &values).unwrap();
        assert!(report.ok, "discrepancy {}", report.sup_discrepancy);
        assert_eq!(report.mode_errors.len(), 9);
        for (k, err) in &report.mode_errors {
            assert!(*err <= 1e-3, "mode {k}: operator error {err}");
        }
    }

    #[test]
    fn vertical_scheme_converges_at_second_order() {
        let k = 4.0;
        let mut errors = Vec::new();
        for cells in [128usize, 256, 512] {
            errors.push(libm::fabs(boundary_rate(k, 2.0, cells) + k));
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((3.0..5.0).contains(&ratio), "refinement ratio {ratio}");
        }
        let extrapolated = libm::fabs(extrapolated_rate(k, 2.0, 512) + k);
        assert!(extrapolated < errors[2] / 10.0, "richardson {extrapolated} vs {}", errors[2]);
    }

    #[test]
    fn non_unit_period_uses_physical_wavenumbers() {
        let grid = PeriodicGrid1D::new(128, 2.0 * TAU).unwrap();
        // Third bin on a doubled period has physical wavenumber 1.5.
        let values: Vec<f64> = (0..128).map(|i| libm::cos(1.5 * grid.node(i))).collect();
        let report = harmonic_extension_check(&grid, &values).unwrap();
        assert!(report.ok, "discrepancy {}", report.sup_discrepancy);
        let k = report
            .mode_errors
            .iter()
            .find(|(k, _)| (*k - 1.5).abs() < 1e-12)
            .unwrap();
        assert!(k.1 < 1e-4, "mode-1.5 operator error {}", k.1);
    }

    #[test]
    fn lattice_parameters_are_validated() {
        let grid = unit_grid(64);
        let values = vec![0.0; 64];
        assert!(harmonic_extension_check_with(&grid, &values, 0.0, 512, 1e-3).is_err());
        assert!(harmonic_extension_check_with(&grid, &values, 2.0, 15, 1e-3).is_err());
        assert!(harmonic_extension_check_with(&grid, &values, 2.0, 511, 1e-3).is_err());
        assert!(harmonic_extension_check_with(&grid, &values[..32], 2.0, 512, 1e-3).is_err());
    }
}
