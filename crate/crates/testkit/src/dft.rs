//! O(N²) discrete Fourier transform straight from the definition.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `X(k) = Σ_n x_n exp(-j 2π n k / N)` for k = 0..N.
///
/// The phase index `n·k` is reduced modulo N before the trigonometric call so
/// that large products do not lose precision.
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let twiddles: Vec<Complex64> = (0..n)
        .map(|m| {
            let theta = -2.0 * PI * m as f64 / n as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                acc += twiddles[(i * k) % n] * v;
            }
            acc
        })
        .collect()
}

/// Peak-to-average ratio of the DFT magnitude spectrum.
pub fn naive_fpar(x: &[f64]) -> f64 {
    let mags: Vec<f64> = naive_dft(x).iter().map(|c| c.norm()).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    peak / mean
}
