//! Frequency peak-to-average ratio of the amplitude spectrum.

use super::FeatureError;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Magnitudes `|X(k)|`, k = 0..N, of the length-N DFT of `x`.
pub fn magnitude_spectrum(x: &[f64]) -> Vec<f64> {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(x.len()));
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// `max_k |X(k)| / mean_k |X(k)|` over all N DFT bins.
///
/// For non-negative amplitudes the DC bin dominates, so the ratio is at
/// least 1 and equals N for a constant sequence.
pub fn fpar(amplitudes: &[f64]) -> Result<f64, FeatureError> {
    if amplitudes.len() < 2 {
        return Err(FeatureError::InvalidParameter(format!(
            "FPAR needs at least 2 samples, got {}",
            amplitudes.len()
        )));
    }
    if let Some(v) = amplitudes.iter().find(|v| !v.is_finite()) {
        return Err(FeatureError::InvalidParameter(format!("non-finite amplitude {v}")));
    }
    if amplitudes.iter().all(|&v| v == 0.0) {
        return Err(FeatureError::InvalidParameter("FPAR of an all-zero sequence".into()));
    }
    let mags = magnitude_spectrum(amplitudes);
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    Ok(peak / mean)
}
