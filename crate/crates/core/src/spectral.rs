//! Spectral operators on periodic rows: half-Laplacian, finite-depth
//! Dirichlet-to-Neumann, and the half-order heat evolution.
//!
//! The operators are Fourier multipliers.  The half-Laplacian of a mode with
//! wavenumber `k` is `-|k|` times the mode; its finite-depth counterpart,
//! the Dirichlet-to-Neumann map of a strip of depth `L` with an insulated
//! bottom, multiplies by `-k tanh(kL)` and converges to `-|k|` as
//! `kL -> inf`.  The half-heat evolution under an influx schedule `a(t)`
//! damps mode `k` by `exp(-|k| * integral of a)`; the depth-tracking variant
//! uses the exact factor `cosh(k L0) / cosh(k L(t))` obtained by integrating
//! the finite-depth rate along the moving front.

use crate::error::Result;
use crate::fft::{dft_real, idft_real};
use crate::grid::PeriodicGrid1D;
use crate::schedule::Schedule;
use alloc::vec::Vec;

/// Applies a real even Fourier multiplier `mult(k)` to a real row.
pub fn apply_multiplier<F: Fn(f64) -> f64>(
    grid: &PeriodicGrid1D,
    values: &[f64],
    mult: F,
) -> Result<Vec<f64>> {
    debug_assert_eq!(values.len(), grid.n());
    let (mut re, mut im) = dft_real(values)?;
    for m in 0..grid.n() {
        let f = mult(grid.wavenumber(m));
        re[m] *= f;
        im[m] *= f;
    }
    idft_real(&re, &im)
}

/// Half-Laplacian of a periodic row: multiplier `-|k|`.
pub fn half_laplacian(grid: &PeriodicGrid1D, values: &[f64]) -> Result<Vec<f64>> {
    apply_multiplier(grid, values, |k| -libm::fabs(k))
}

/// Dirichlet-to-Neumann derivative for a strip of depth `L` with insulated
/// bottom: multiplier `-k tanh(kL)`.
pub fn dtn_strip(grid: &PeriodicGrid1D, values: &[f64], depth: f64) -> Result<Vec<f64>> {
    apply_multiplier(grid, values, |k| {
        let ka = libm::fabs(k);
        -ka * libm::tanh(ka * depth)
    })
}

/// `ln cosh(x)` without overflow for large `x`.
fn ln_cosh(x: f64) -> f64 {
    let a = libm::fabs(x);
    a + libm::log1p(libm::exp(-2.0 * a)) - core::f64::consts::LN_2
}

/// Evolves a row under the half-order heat flow with influx schedule `a`:
/// mode `k` is damped by `exp(-|k| A)` with `A` the schedule integral over
/// `[t0, t1]`.
pub fn evolve_half_heat(
    grid: &PeriodicGrid1D,
    values: &[f64],
    schedule: &Schedule,
    t0: f64,
    t1: f64,
) -> Result<Vec<f64>> {
    let a_int = schedule.integral(t0, t1);
    apply_multiplier(grid, values, |k| libm::exp(-libm::fabs(k) * a_int))
}

/// Evolves a row under the finite-depth half-heat flow with the depth
/// tracking the advancing front: the depth grows from `depth0` by the
/// influx integral, and the exact per-mode damping over `[t0, t1]` is
/// `cosh(k depth0) / cosh(k (depth0 + A))`, evaluated in log space.
pub fn evolve_dtn_heat(
    grid: &PeriodicGrid1D,
    values: &[f64],
    schedule: &Schedule,
    t0: f64,
    t1: f64,
    depth0: f64,
) -> Result<Vec<f64>> {
    let a_int = schedule.integral(t0, t1);
    apply_multiplier(grid, values, |k| {
        let ka = libm::fabs(k);
        libm::exp(ln_cosh(ka * depth0) - ln_cosh(ka * (depth0 + a_int)))
    })
}

/// Amplitude of a single cosine mode `k` in a real row: `2 |hat w(k)| / n`
/// for `0 < k < n/2`.
pub fn mode_amplitude(grid: &PeriodicGrid1D, values: &[f64], mode: usize) -> Result<f64> {
    let (re, im) = dft_real(values)?;
    let n = grid.n() as f64;
    let scale = if mode == 0 || mode == grid.n() / 2 {
        1.0 / n
    } else {
        2.0 / n
    };
    Ok(scale * libm::hypot(re[mode], im[mode]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::TAU;

    fn grid(n: usize) -> PeriodicGrid1D {
        PeriodicGrid1D::with_default_length(n).unwrap()
    }

    fn cosine_row(g: &PeriodicGrid1D, k: f64, amp: f64, phase: f64) -> Vec<f64> {
        (0..g.n())
            .map(|i| amp * libm::cos(k * g.node(i) + phase))
            .collect()
    }

    #[test]
    fn half_laplacian_scales_single_modes() {
        let g = grid(64);
        for k in [1.0, 3.0, 7.0] {
            let w = cosine_row(&g, k, 0.8, 0.3);
            let hw = half_laplacian(&g, &w).unwrap();
            for (a, b) in hw.iter().zip(w.iter()) {
                assert!((a + k * b).abs() < 1e-10, "mode {k}");
            }
        }
    }

    #[test]
    fn half_laplacian_kills_constants() {
        let g = grid(32);
        let w = alloc::vec![2.5; 32];
        let hw = half_laplacian(&g, &w).unwrap();
        for a in hw {
            assert!(a.abs() < 1e-12);
        }
    }

    #[test]
    fn dtn_matches_tanh_rate_and_deep_limit() {
        let g = grid(64);
        let depth = 2.0;
        let w = cosine_row(&g, 1.0, 1.0, 0.0);
        let dw = dtn_strip(&g, &w, depth).unwrap();
        // Finite-depth multiplier at k = 1, L = 2.
        let expected = -libm::tanh(2.0);
        for (a, b) in dw.iter().zip(w.iter()) {
            assert!((a - expected * b).abs() < 1e-10);
        }
        // Deep strip converges to the half-Laplacian.
        let deep = dtn_strip(&g, &w, 50.0).unwrap();
        let half = half_laplacian(&g, &w).unwrap();
        for (a, b) in deep.iter().zip(half.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn half_heat_damps_by_schedule_integral() {
        let g = grid(64);
        let s = Schedule::new(&[(0.0, 1.0), (0.5, 2.0)]).unwrap();
        let w = cosine_row(&g, 3.0, 1.0, 1.1);
        let evolved = evolve_half_heat(&g, &w, &s, 0.0, 1.0).unwrap();
        // A(1) = 0.5 * 1 + 0.5 * 2 = 1.5; damping exp(-3 * 1.5).
        let factor = libm::exp(-3.0 * 1.5);
        for (a, b) in evolved.iter().zip(w.iter()) {
            assert!((a - factor * b).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_tracking_heat_matches_quadrature_of_the_rate() {
        let g = grid(64);
        let s = Schedule::new(&[(0.0, 1.0), (0.3, 1.5)]).unwrap();
        let depth0 = 2.0;
        let t1 = 0.8;
        let k = 2.0;
        // Independent route: fine Riemann quadrature of the instantaneous
        // finite-depth rate a(t) k tanh(k L(t)) along the moving depth.
        let steps = 200_000;
        let dt = t1 / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * dt;
            let depth = depth0 + s.integral(0.0, t);
            acc += s.value_at(t) * k * libm::tanh(k * depth) * dt;
        }
        let w = cosine_row(&g, k, 1.0, 0.4);
        let evolved = evolve_dtn_heat(&g, &w, &s, 0.0, t1, depth0).unwrap();
        let factor = libm::exp(-acc);
        for (a, b) in evolved.iter().zip(w.iter()) {
            assert!((a - factor * b).abs() < 1e-8);
        }
    }

    #[test]
    fn ln_cosh_is_stable_for_large_arguments() {
        // cosh overflows near 710; the log-space form must not.
        let x = 500.0;
        let direct = x - core::f64::consts::LN_2; // ln cosh x -> x - ln 2
        assert!((ln_cosh(x) - direct).abs() < 1e-12);
        assert!((ln_cosh(0.5) - libm::log(libm::cosh(0.5))).abs() < 1e-14);
    }

    #[test]
    fn mode_amplitude_reads_back_cosines() {
        let g = grid(128);
        let mut w = cosine_row(&g, 5.0, 0.37, 0.9);
        for (i, v) in w.iter_mut().enumerate() {
            *v += 1.7 + 0.2 * libm::cos(TAU / g.len() * 11.0 * g.node(i));
        }
        assert!((mode_amplitude(&g, &w, 5).unwrap() - 0.37).abs() < 1e-12);
        assert!((mode_amplitude(&g, &w, 0).unwrap() - 1.7).abs() < 1e-12);
    }

    /// Direct principal-value quadrature of the singular-integral form
    /// `(1/pi) PV int (w(x+y) - w(x)) / y^2 dy`, independent of any
    /// transform: symmetric second-difference integrand on lattice
    /// multiples, trapezoid rule out to `reach`, and a mean-field tail
    /// correction beyond it.
    fn singular_integral_oracle(g: &PeriodicGrid1D, w: &[f64], i: usize, reach: f64) -> f64 {
        let n = g.n();
        let h = g.h();
        let m_max = libm::floor(reach / h) as usize;
        let mean = w.iter().sum::<f64>() / n as f64;
        let sample = |m: i64| w[((i as i64 + m).rem_euclid(n as i64)) as usize];
        let integrand = |m: usize| {
            if m == 0 {
                // Limit of the symmetrized integrand: the second derivative.
                (sample(1) + sample(-1) - 2.0 * w[i]) / (h * h)
            } else {
                let y = m as f64 * h;
                (sample(m as i64) + sample(-(m as i64)) - 2.0 * w[i]) / (y * y)
            }
        };
        let mut acc = 0.5 * (integrand(0) + integrand(m_max));
        for m in 1..m_max {
            acc += integrand(m);
        }
        let body = acc * h;
        let tail = 2.0 * (mean - w[i]) / (m_max as f64 * h);
        (body + tail) / core::f64::consts::PI
    }

    #[test]
    fn half_laplacian_matches_the_singular_integral_quadrature() {
        use rand::Rng;
        use rand::SeedableRng;
        let g = grid(512);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(424_242);
        // Smooth random band-limited field.
        let mut w = alloc::vec![0.0f64; 512];
        for k in 1..=5 {
            let amp = rng.gen_range(0.2..1.0) / (k * k) as f64;
            let phase = rng.gen_range(0.0..TAU);
            for (i, v) in w.iter_mut().enumerate() {
                *v += amp * libm::cos(k as f64 * g.node(i) + phase);
            }
        }
        let spectral = half_laplacian(&g, &w).unwrap();
        let reach = 20.0 * core::f64::consts::PI;
        for i in (0..512).step_by(17) {
            let direct = singular_integral_oracle(&g, &w, i, reach);
            assert!(
                (spectral[i] - direct).abs() < 1e-4,
                "node {i}: spectral {} vs quadrature {direct}",
                spectral[i]
            );
        }
    }

    #[test]
    fn half_laplacian_is_negative_semidefinite() {
        use rand::Rng;
        use rand::SeedableRng;
        let g = grid(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for trial in 0..50 {
            let w: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lw = half_laplacian(&g, &w).unwrap();
            let inner: f64 = w.iter().zip(lw.iter()).map(|(a, b)| a * b).sum();
            assert!(inner <= 1e-10, "trial {trial}: <w, Lw> = {inner}");
            // Strict negativity once any nonzero mode is present.
            let mean = w.iter().sum::<f64>() / 64.0;
            let dev: f64 = w.iter().map(|v| (v - mean) * (v - mean)).sum();
            if dev > 1e-6 {
                assert!(inner < -1e-8 * dev, "trial {trial}: inner {inner} for dev {dev}");
            }
        }
        let constant = alloc::vec![0.4; 64];
        let lc = half_laplacian(&g, &constant).unwrap();
        let inner: f64 = constant.iter().zip(lc.iter()).map(|(a, b)| a * b).sum();
        assert!(inner.abs() < 1e-12);
    }

    #[test]
    fn half_heat_contracts_the_sup_norm_and_keeps_the_mean() {
        use rand::Rng;
        use rand::SeedableRng;
        let g = grid(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(909);
        let schedule = Schedule::new(&[(0.0, 1.0), (0.2, 1.7)]).unwrap();
        for _ in 0..25 {
            let w: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let evolved = evolve_half_heat(&g, &w, &schedule, 0.0, 0.6).unwrap();
            let sup0 = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sup1 = evolved.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sup1 <= sup0 + 1e-12, "sup grew: {sup0} -> {sup1}");
            let mean0 = w.iter().sum::<f64>() / 64.0;
            let mean1 = evolved.iter().sum::<f64>() / 64.0;
            assert!((mean0 - mean1).abs() < 1e-12, "mean drifted: {mean0} -> {mean1}");
        }
    }

    #[test]
    fn half_heat_composes_as_a_semigroup() {
        let g = grid(64);
        let schedule = Schedule::new(&[(0.0, 1.0), (0.45, 2.0)]).unwrap();
        let mut w = cosine_row(&g, 1.0, 0.5, 0.2);
        for (i, v) in w.iter_mut().enumerate() {
            *v += 0.25 * libm::cos(3.0 * g.node(i));
        }
        let two_leg_mid = evolve_half_heat(&g, &w, &schedule, 0.0, 0.3).unwrap();
        let two_leg = evolve_half_heat(&g, &two_leg_mid, &schedule, 0.3, 0.8).unwrap();
        let one_leg = evolve_half_heat(&g, &w, &schedule, 0.0, 0.8).unwrap();
        for (a, b) in two_leg.iter().zip(one_leg.iter()) {
            assert!((a - b).abs() < 1e-12, "semigroup gap {}", (a - b).abs());
        }
    }

    #[test]
    fn dtn_rates_increase_with_depth_at_a_sharp_exponential_gap() {
        let g = grid(64);
        for k in [1usize, 2, 3] {
            let w = cosine_row(&g, k as f64, 1.0, 0.0);
            let half = half_laplacian(&g, &w).unwrap();
            let mut previous_gap = f64::INFINITY;
            for depth in [0.5, 1.0, 2.0, 3.0] {
                let dw = dtn_strip(&g, &w, depth).unwrap();
                // Per-mode gap to the deep-limit multiplier.
                let mut gap = 0.0f64;
                for (a, b) in dw.iter().zip(half.iter()) {
                    gap = gap.max((a - b).abs());
                }
                assert!(gap < previous_gap, "gap not shrinking at depth {depth}");
                previous_gap = gap;
                // k (1 - tanh(kL)) lies within a factor 2 of k e^{-2kL}:
                // the plain e^{-2L} heuristic understates it by < 2.
                let scale = k as f64 * libm::exp(-2.0 * k as f64 * depth);
                assert!(gap <= 2.0 * scale + 1e-14, "k {k}, L {depth}: gap {gap}");
                assert!(gap >= 0.9 * scale, "k {k}, L {depth}: gap {gap} vs scale {scale}");
            }
        }
    }
}
