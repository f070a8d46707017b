//! Thin helpers over `rustfft` for periodic samples on `[0, 2 pi)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Fourier coefficients `F_n = (1/M) sum_m f_m e^{-i n theta_m}`, stored in
/// FFT order (index `n mod M`).
pub(crate) fn coefficients(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

/// Inverse of [`coefficients`].
pub(crate) fn synthesize(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// Signed frequency of FFT bin `k` for length `m`.
pub(crate) fn frequency(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coefficients_of_single_mode() {
        let m = 16;
        let s: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, -3.0 * 2.0 * PI * j as f64 / m as f64) * 2.0)
            .collect();
        let c = coefficients(&s);
        for (k, v) in c.iter().enumerate() {
            let expect = if frequency(k, m) == -3 { 2.0 } else { 0.0 };
            assert!((v - expect).norm() < 1e-13);
        }
        let back = synthesize(&c);
        for (a, b) in back.iter().zip(&s) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
