//! Per-dimension z-score scaling fitted on training vectors.

use super::{FeatureError, FeatureVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: [f64; 3],
    /// Population standard deviation; a dimension with zero spread gets 1.
    pub std: [f64; 3],
}

impl NormalizationStats {
    pub fn identity() -> Self {
        NormalizationStats {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    pub fn apply(&self, f: [f64; 3]) -> [f64; 3] {
        [
            (f[0] - self.mean[0]) / self.std[0],
            (f[1] - self.mean[1]) / self.std[1],
            (f[2] - self.mean[2]) / self.std[2],
        ]
    }
}

pub fn fit_normalization(vectors: &[FeatureVector]) -> Result<NormalizationStats, FeatureError> {
    if vectors.is_empty() {
        return Err(FeatureError::EmptyTrainingSet);
    }
    let n = vectors.len() as f64;
    let mut mean = [0.0; 3];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v.as_array()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 3];
    for v in vectors {
        for ((s, x), m) in var.iter_mut().zip(v.as_array()).zip(mean) {
            *s += (x - m) * (x - m);
        }
    }
    let std = var.map(|s| {
        let sd = (s / n).sqrt();
        if sd > 0.0 && sd.is_finite() {
            sd
        } else {
            1.0
        }
    });
    Ok(NormalizationStats { mean, std })
}

pub fn apply_normalization(vector: &FeatureVector, stats: &NormalizationStats) -> FeatureVector {
    vector.with_values(stats.apply(vector.as_array()))
}
