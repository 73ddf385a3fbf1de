//! Range-cell time series, datasets, and overlapped segmentation.
//!
//! A [`Dataset`] holds the complex returns of every range cell of one radar
//! recording. Exactly one cell carries the target ([`CellRole::Primary`]);
//! its neighbours may be target-contaminated ([`CellRole::Secondary`]) and
//! are never used for training or testing. [`segment_cell`] cuts a cell into
//! overlapping amplitude windows that feed the feature extractors.

mod io;
mod synth;

pub use io::{load_dataset, save_dataset, DatasetFormat};
pub use synth::{synthesize_dataset, SynthConfig};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

/// Sample count of one IPIX range cell.
pub const IPIX_CELL_LEN: usize = 1 << 17;
/// IPIX pulse repetition frequency.
pub const IPIX_SAMPLE_RATE_HZ: f64 = 1000.0;

pub const DEFAULT_STEP: usize = 64;
pub const DEFAULT_WINDOW: usize = 4096;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },
    #[error("missing metadata: {0}")]
    MissingMetadata(String),
    #[error("inconsistent cells: {0}")]
    InconsistentCells(String),
    #[error("polarization mismatch: requested {requested}, metadata declares {declared}")]
    PolarizationMismatch {
        requested: Polarization,
        declared: Polarization,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cell {0} is a secondary cell and cannot be labeled")]
    SecondaryCellNotAllowed(usize),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellRole {
    Primary,
    Secondary,
    ClutterOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    HH,
    VV,
    HV,
    VH,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::HH => "HH",
            Polarization::VV => "VV",
            Polarization::HV => "HV",
            Polarization::VH => "VH",
        };
        f.write_str(s)
    }
}

impl FromStr for Polarization {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HH" => Ok(Polarization::HH),
            "VV" => Ok(Polarization::VV),
            "HV" => Ok(Polarization::HV),
            "VH" => Ok(Polarization::VH),
            other => Err(SignalError::InvalidParameter(format!(
                "unknown polarization {other:?}"
            ))),
        }
    }
}

/// Class label of a segment or feature vector: target `+1`, clutter `−1`.
/// Serialized as the integer `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Target,
    Clutter,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Target => 1.0,
            Label::Clutter => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Target => 1,
            Label::Clutter => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Target),
            -1 => Some(Label::Clutter),
            _ => None,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        Label::from_i8(v).ok_or_else(|| format!("label must be 1 or -1, got {v}"))
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.as_i8()
    }
}

/// One range cell's I/Q returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub samples: Vec<Complex32>,
    pub sample_rate_hz: f64,
    pub cell_index: usize,
    pub cell_role: CellRole,
}

impl ComplexSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Envelope `sqrt(I² + Q²)` of every sample.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|c| (c.re as f64).hypot(c.im as f64))
            .collect()
    }

    /// Mean of `|x|²` over the cell.
    pub fn mean_power(&self) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|c| {
                let (re, im) = (c.re as f64, c.im as f64);
                re * re + im * im
            })
            .sum();
        sum / self.samples.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    Loaded,
    Synthetic { seed: u64, scr_db: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub cells: Vec<ComplexSeries>,
    pub polarization: Polarization,
    pub name: String,
    pub origin: Origin,
}

impl Dataset {
    /// Checks the dataset-level invariants: at least one cell, one primary
    /// cell, and a common length and sample rate.
    pub fn validate(&self) -> Result<(), SignalError> {
        let first = self
            .cells
            .first()
            .ok_or_else(|| SignalError::InconsistentCells("dataset has no cells".into()))?;
        if first.is_empty() {
            return Err(SignalError::InconsistentCells("cell 0 is empty".into()));
        }
        for (k, cell) in self.cells.iter().enumerate() {
            if cell.len() != first.len() {
                return Err(SignalError::InconsistentCells(format!(
                    "cell {k} has {} samples, cell 0 has {}",
                    cell.len(),
                    first.len()
                )));
            }
            if cell.sample_rate_hz != first.sample_rate_hz {
                return Err(SignalError::InconsistentCells(format!(
                    "cell {k} sample rate {} Hz differs from {} Hz",
                    cell.sample_rate_hz, first.sample_rate_hz
                )));
            }
        }
        let primaries = self
            .cells
            .iter()
            .filter(|c| c.cell_role == CellRole::Primary)
            .count();
        if primaries != 1 {
            return Err(SignalError::MissingMetadata(format!(
                "expected exactly one primary cell, found {primaries}"
            )));
        }
        Ok(())
    }

    pub fn primary_cell(&self) -> Option<&ComplexSeries> {
        self.cells.iter().find(|c| c.cell_role == CellRole::Primary)
    }

    pub fn clutter_cells(&self) -> impl Iterator<Item = &ComplexSeries> {
        self.cells
            .iter()
            .filter(|c| c.cell_role == CellRole::ClutterOnly)
    }

    /// Cells eligible for labeling (primary and clutter-only), in index order.
    pub fn labeled_cells(&self) -> impl Iterator<Item = &ComplexSeries> {
        self.cells
            .iter()
            .filter(|c| c.cell_role != CellRole::Secondary)
    }

    /// Signal-to-clutter ratio (dB) of the primary cell, measured as the
    /// primary cell's excess power over the mean clutter-only cell power.
    pub fn empirical_scr_db(&self) -> Option<f64> {
        let primary = self.primary_cell()?.mean_power();
        let clutter: Vec<f64> = self.clutter_cells().map(|c| c.mean_power()).collect();
        if clutter.is_empty() {
            return None;
        }
        let clutter = clutter.iter().sum::<f64>() / clutter.len() as f64;
        Some(10.0 * ((primary - clutter) / clutter).log10())
    }
}

/// A length-D amplitude window cut from one cell.
///
/// The envelope of the whole cell is shared between all segments of that
/// cell, so cutting 2000 overlapping windows does not copy 2000 × D samples.
#[derive(Debug, Clone)]
pub struct Segment {
    envelope: Arc<[f64]>,
    offset: usize,
    len: usize,
    pub label: Label,
    pub source_cell: usize,
    pub start_index: usize,
}

impl Segment {
    /// A segment owning its own amplitude buffer.
    pub fn new(amplitudes: Vec<f64>, label: Label, source_cell: usize, start_index: usize) -> Self {
        Segment {
            len: amplitudes.len(),
            envelope: amplitudes.into(),
            offset: 0,
            label,
            source_cell,
            start_index,
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.envelope[self.offset..self.offset + self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Number of full windows of length `window` with hop `step` in `n` samples.
pub fn segment_count(n: usize, step: usize, window: usize) -> usize {
    if window > n || step == 0 {
        0
    } else {
        (n - window) / step + 1
    }
}

/// Cuts `cell` into windows `u_j = x[d(j−1) .. d(j−1) + D]`, j = 1, 2, ...,
/// keeping every window that lies fully inside the cell.
pub fn segment_cell(cell: &ComplexSeries, step: usize, window: usize) -> Result<Vec<Segment>, SignalError> {
    let label = match cell.cell_role {
        CellRole::Primary => Label::Target,
        CellRole::ClutterOnly => Label::Clutter,
        CellRole::Secondary => return Err(SignalError::SecondaryCellNotAllowed(cell.cell_index)),
    };
    if step == 0 || window == 0 || step > window || window > cell.len() {
        return Err(SignalError::InvalidWindow(format!(
            "need 1 <= d <= D <= {}, got d={step}, D={window}",
            cell.len()
        )));
    }
    let envelope: Arc<[f64]> = cell.amplitudes().into();
    let count = segment_count(cell.len(), step, window);
    Ok((0..count)
        .map(|j| Segment {
            envelope: Arc::clone(&envelope),
            offset: j * step,
            len: window,
            label,
            source_cell: cell.cell_index,
            start_index: j * step,
        })
        .collect())
}

/// Segments of every labeled cell of `dataset`, primary and clutter-only, in
/// cell order. Secondary cells are skipped.
pub fn segment_dataset(dataset: &Dataset, step: usize, window: usize) -> Result<Vec<Segment>, SignalError> {
    let mut out = Vec::new();
    for cell in dataset.labeled_cells() {
        out.extend(segment_cell(cell, step, window)?);
    }
    Ok(out)
}
