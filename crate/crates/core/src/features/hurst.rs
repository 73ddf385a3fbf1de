//! Temporal Hurst exponent by rescaled-range (R/S) analysis.
//!
//! For each scale τ the sequence is cut into `⌊N/τ⌋` adjacent sub-periods
//! (the remainder tail is dropped). Each sub-period contributes the range of
//! its cumulative mean-removed sum divided by its standard deviation; the
//! average over sub-periods is `(R/S)_τ`. The exponent is the least-squares
//! slope of `log2 (R/S)_τ` against `log2 τ`.

use super::FeatureError;

/// Log-spaced scales from 128 to 2048 samples (0.128 s to 2.048 s at 1 kHz).
pub const DEFAULT_TAU_GRID: [usize; 9] = [128, 181, 256, 362, 512, 724, 1024, 1448, 2048];

pub const MIN_TAU: usize = 8;

/// Checks that `tau_grid` is usable on a sequence of length `n` and returns
/// its distinct values in ascending order.
pub fn validate_tau_grid(n: usize, tau_grid: &[usize]) -> Result<Vec<usize>, FeatureError> {
    let mut taus = tau_grid.to_vec();
    taus.sort_unstable();
    taus.dedup();
    if taus.len() < 3 {
        return Err(FeatureError::InvalidParameter(format!(
            "tau grid needs at least 3 distinct scales, got {taus:?}"
        )));
    }
    if taus[0] < MIN_TAU {
        return Err(FeatureError::InvalidParameter(format!(
            "scales must be >= {MIN_TAU}, got {}",
            taus[0]
        )));
    }
    let largest = *taus.last().unwrap();
    if n < 2 * largest {
        return Err(FeatureError::InvalidParameter(format!(
            "sequence of length {n} is shorter than twice the largest scale {largest}"
        )));
    }
    Ok(taus)
}

/// Mean of `R_l / S_l` over the sub-periods of length `tau`, skipping
/// sub-periods with zero standard deviation. `None` if all are degenerate.
pub fn rescaled_range(x: &[f64], tau: usize) -> Option<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    for chunk in x.chunks_exact(tau) {
        let mean = chunk.iter().sum::<f64>() / tau as f64;
        let mut var = 0.0;
        let mut cum = 0.0;
        let mut cmax = f64::NEG_INFINITY;
        let mut cmin = f64::INFINITY;
        for &v in chunk {
            let dev = v - mean;
            var += dev * dev;
            cum += dev;
            cmax = cmax.max(cum);
            cmin = cmin.min(cum);
        }
        let std = (var / tau as f64).sqrt();
        if std > 0.0 {
            total += (cmax - cmin) / std;
            used += 1;
        }
    }
    (used > 0).then(|| total / used as f64)
}

/// Ordinary least-squares slope of `log2 rs` against `log2 tau`.
pub fn hurst_from_rs(taus: &[usize], rs: &[f64]) -> f64 {
    let xs: Vec<f64> = taus.iter().map(|&t| (t as f64).log2()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Hurst exponent of `amplitudes` over the scales in `tau_grid`.
pub fn the(amplitudes: &[f64], tau_grid: &[usize]) -> Result<f64, FeatureError> {
    let taus = validate_tau_grid(amplitudes.len(), tau_grid)?;
    if let Some(v) = amplitudes.iter().find(|v| !v.is_finite()) {
        return Err(FeatureError::InvalidParameter(format!("non-finite amplitude {v}")));
    }
    let mut rs = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let value = rescaled_range(amplitudes, tau).ok_or_else(|| {
            FeatureError::DegenerateInput(format!("every sub-period of length {tau} is constant"))
        })?;
        rs.push(value);
    }
    Ok(hurst_from_rs(&taus, &rs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law_gives_exact_slope() {
        let taus = DEFAULT_TAU_GRID;
        let rs: Vec<f64> = taus
            .iter()
            .map(|&t| 2f64.powf(0.7 * (t as f64).log2() + 1.0))
            .collect();
        assert!((hurst_from_rs(&taus, &rs) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rescaled_range_by_hand() {
        // Sub-period [1, 3]: mean 2, deviations -1, 1, cumulative -1, 0,
        // R = 1, S = 1 → R/S = 1. Sub-period [5, 5] is constant and skipped.
        assert_eq!(rescaled_range(&[1.0, 3.0, 5.0, 5.0], 2), Some(1.0));
        assert_eq!(rescaled_range(&[2.0; 6], 3), None);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let err = the(&[1.0; 4096], &DEFAULT_TAU_GRID).unwrap_err();
        assert!(matches!(err, FeatureError::DegenerateInput(_)));
    }

    #[test]
    fn grid_preconditions() {
        let x = vec![0.0; 4096];
        assert!(matches!(the(&x, &[128, 256]), Err(FeatureError::InvalidParameter(_))));
        assert!(matches!(the(&x, &[128, 128, 256, 256]), Err(FeatureError::InvalidParameter(_))));
        assert!(matches!(the(&x, &[4, 16, 32]), Err(FeatureError::InvalidParameter(_))));
        assert!(matches!(the(&x, &[512, 1024, 4096]), Err(FeatureError::InvalidParameter(_))));
    }

    #[test]
    fn remainder_tail_is_ignored() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        let mut y = x.clone();
        y.extend_from_slice(&[1e6; 7]);
        // 1000 and 1007 both hold ⌊·/τ⌋ full periods for these scales.
        let grid = [100, 125, 250, 500];
        assert_eq!(the(&x, &grid).unwrap(), the(&y, &grid).unwrap());
    }

    proptest! {
        #[test]
        fn affine_invariant(seed in 0u64..1000, a in 0.01f64..100.0, b in -50.0f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..512).map(|_| rng.gen::<f64>()).collect();
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let grid = [16, 32, 64, 128, 256];
            let (hx, hy) = (the(&x, &grid).unwrap(), the(&y, &grid).unwrap());
            prop_assert!((hx - hy).abs() < 1e-9, "{} vs {}", hx, hy);
        }
    }
}
