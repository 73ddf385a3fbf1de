//! The three-feature description of a segment: TIE, THE and FPAR.

mod fpar;
mod hurst;
mod io;
mod normalize;
mod tie;

pub use fpar::{fpar, magnitude_spectrum};
pub use hurst::{hurst_from_rs, rescaled_range, the, validate_tau_grid, DEFAULT_TAU_GRID, MIN_TAU};
pub use io::{read_features, write_features, FEATURE_CSV_HEADER};
pub use normalize::{apply_normalization, fit_normalization, NormalizationStats};
pub use tie::{tie, DEFAULT_K_BINS};

use crate::signal::{Label, Segment};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("normalization needs at least one training vector")]
    EmptyTrainingSet,
    #[error("segment (cell {source_cell}, offset {start_index}): {source}")]
    AtSegment {
        source_cell: usize,
        start_index: usize,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed { path: String, line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A labeled point `[TIE, THE, FPAR]` with the origin of its segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub tie: f64,
    pub the: f64,
    pub fpar: f64,
    pub label: Label,
    pub source_cell: usize,
    pub start_index: usize,
}

impl FeatureVector {
    pub fn new(tie: f64, the: f64, fpar: f64, label: Label) -> Self {
        FeatureVector {
            tie,
            the,
            fpar,
            label,
            source_cell: 0,
            start_index: 0,
        }
    }

    pub fn from_array(f: [f64; 3], label: Label) -> Self {
        Self::new(f[0], f[1], f[2], label)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.tie, self.the, self.fpar]
    }

    pub fn with_values(self, f: [f64; 3]) -> Self {
        FeatureVector {
            tie: f[0],
            the: f[1],
            fpar: f[2],
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub k_bins: usize,
    pub tau_grid: Vec<usize>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            k_bins: DEFAULT_K_BINS,
            tau_grid: DEFAULT_TAU_GRID.to_vec(),
        }
    }
}

impl FeatureConfig {
    /// Validates the configuration against a window length `window`.
    pub fn check(&self, window: usize) -> Result<(), FeatureError> {
        if self.k_bins < 1 {
            return Err(FeatureError::InvalidParameter("k_bins must be >= 1".into()));
        }
        validate_tau_grid(window, &self.tau_grid).map(|_| ())
    }
}

fn compute(x: &[f64], config: &FeatureConfig) -> Result<[f64; 3], FeatureError> {
    Ok([tie(x, config.k_bins)?, the(x, &config.tau_grid)?, fpar(x)?])
}

/// Feature vector of one segment; the label is copied from the segment.
pub fn extract(segment: &Segment, config: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let f = compute(segment.amplitudes(), config).map_err(|e| FeatureError::AtSegment {
        source_cell: segment.source_cell,
        start_index: segment.start_index,
        source: Box::new(e),
    })?;
    Ok(FeatureVector {
        tie: f[0],
        the: f[1],
        fpar: f[2],
        label: segment.label,
        source_cell: segment.source_cell,
        start_index: segment.start_index,
    })
}

/// Extracts every segment in parallel; output order follows input order.
pub fn extract_all(segments: &[Segment], config: &FeatureConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    segments.par_iter().map(|s| extract(s, config)).collect()
}
