//! Iterative radix-2 complex FFT.
//!
//! The lateral grids are powers of two by construction, so a hand-rolled
//! radix-2 transform covers every spectral operation in the crate without
//! pulling a std-only dependency into the core.  The forward transform is
//! unnormalized; the inverse divides by `n`.  Twiddles are generated from
//! `libm` sin/cos in a fixed order, so transforms are bit-reproducible.

use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

/// In-place complex FFT over split real/imaginary storage.
pub fn fft_inplace(re: &mut [f64], im: &mut [f64], inverse: bool) -> Result<()> {
    let n = re.len();
    if n != im.len() {
        return Err(CoreError::Invalid {
            what: "fft input",
            detail: format!("real and imaginary lengths differ: {n} vs {}", im.len()),
        });
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(CoreError::Invalid {
            what: "fft input",
            detail: format!("length {n} must be a power of two >= 2"),
        });
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let (wr, wi) = (libm::cos(ang), libm::sin(ang));
        let mut start = 0;
        while start < n {
            let mut cr = 1.0;
            let mut ci = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let tr = re[b] * cr - im[b] * ci;
                let ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            start += len;
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
    Ok(())
}

/// Forward transform of a real row; returns split spectrum `(re, im)`.
pub fn dft_real(values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut re = values.to_vec();
    let mut im = vec![0.0; values.len()];
    fft_inplace(&mut re, &mut im, false)?;
    Ok((re, im))
}

/// Inverse transform of a Hermitian spectrum; returns the real parts.
pub fn idft_real(re: &[f64], im: &[f64]) -> Result<Vec<f64>> {
    let mut r = re.to_vec();
    let mut i = im.to_vec();
    fft_inplace(&mut r, &mut i, true)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = v.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for m in 0..n {
            for (j, &x) in v.iter().enumerate() {
                let ang = -TAU * (m * j) as f64 / n as f64;
                re[m] += x * ang.cos();
                im[m] += x * ang.sin();
            }
        }
        (re, im)
    }

    #[test]
    fn matches_naive_dft() {
        let v: Vec<f64> = (0..32)
            .map(|i| (0.3 + i as f64).sin() + 0.1 * (i as f64).cos())
            .collect();
        let (re, im) = dft_real(&v).unwrap();
        let (nre, nim) = naive_dft(&v);
        for m in 0..v.len() {
            assert!((re[m] - nre[m]).abs() < 1e-9, "bin {m}");
            assert!((im[m] - nim[m]).abs() < 1e-9, "bin {m}");
        }
    }

    #[test]
    fn roundtrip_identity() {
        let v: Vec<f64> = (0..64).map(|i| ((i * i) % 17) as f64 / 17.0).collect();
        let (re, im) = dft_real(&v).unwrap();
        let back = idft_real(&re, &im).unwrap();
        for (a, b) in v.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut re = vec![0.0; 12];
        let mut im = vec![0.0; 12];
        assert!(fft_inplace(&mut re, &mut im, false).is_err());
    }
}
