//! Reference implementations used only by tests.
//!
//! Every routine here is written from its textbook definition and shares no
//! code with `seadet-core`, so it can serve as an independent oracle for the
//! production paths (SMO solver, FFT-based FPAR, histogram entropy, ...).

pub mod dft;
pub mod fbm;
pub mod linear;
pub mod qp;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded RNG used throughout the oracle tests.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shannon entropy (bits) of the K-bin equal-width histogram of `x`, counted
/// by comparing every value against explicit bin edges.
pub fn histogram_entropy(x: &[f64], k: usize) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return 0.0;
    }
    let width = (hi - lo) / k as f64;
    let mut counts = vec![0usize; k];
    for &v in x {
        let mut placed = false;
        for (b, count) in counts.iter_mut().enumerate() {
            let left = lo + b as f64 * width;
            let last = b == k - 1;
            let right = if last { hi } else { lo + (b + 1) as f64 * width };
            if v >= left && (v < right || (last && v <= right)) {
                *count += 1;
                placed = true;
                break;
            }
        }
        assert!(placed, "value {v} fell outside [{lo}, {hi}]");
    }
    let n = x.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
