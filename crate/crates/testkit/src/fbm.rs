//! Exact fractional Gaussian noise by circulant embedding (Davies–Harte).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `n` samples of unit-variance fractional Gaussian noise (the increments of
/// fractional Brownian motion) with Hurst exponent `hurst`.
pub fn fgn<R: Rng>(n: usize, hurst: f64, rng: &mut R) -> Vec<f64> {
    assert!(hurst > 0.0 && hurst < 1.0);
    let m = 2 * n;
    let mut row: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex64::new(fgn_autocovariance(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let mut spectrum: Vec<Complex64> = row
        .iter()
        .map(|lambda| {
            // Eigenvalues are real and non-negative for fGn; clamp round-off.
            let scale = (lambda.re.max(0.0) / m as f64).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex64::new(a, b) * scale
        })
        .collect();
    fft.process(&mut spectrum);
    spectrum.iter().take(n).map(|c| c.re).collect()
}

/// Sample autocovariance at `lag` (mean removed, divisor N).
pub fn sample_autocovariance(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (0..n - lag)
        .map(|i| (x[i] - mean) * (x[i + lag] - mean))
        .sum::<f64>()
        / n as f64
}
