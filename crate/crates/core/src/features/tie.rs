//! Temporal information entropy: Shannon entropy of the amplitude histogram.

use super::FeatureError;

pub const DEFAULT_K_BINS: usize = 100;

/// Entropy in bits of the `k_bins` equal-width histogram spanning
/// `[min(x), max(x)]`, with the top edge closed. Empty bins contribute 0.
///
/// A constant sequence puts all mass in one bin and returns 0.
pub fn tie(amplitudes: &[f64], k_bins: usize) -> Result<f64, FeatureError> {
    if k_bins < 1 {
        return Err(FeatureError::InvalidParameter("TIE needs at least one bin".into()));
    }
    if amplitudes.is_empty() {
        return Err(FeatureError::InvalidParameter("TIE of an empty sequence".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in amplitudes {
        if !v.is_finite() {
            return Err(FeatureError::InvalidParameter(format!("non-finite amplitude {v}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi == lo {
        return Ok(0.0);
    }

    let width = (hi - lo) / k_bins as f64;
    let mut counts = vec![0u32; k_bins];
    for &v in amplitudes {
        let bin = (((v - lo) / width) as usize).min(k_bins - 1);
        counts[bin] += 1;
    }
    let n = amplitudes.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}
