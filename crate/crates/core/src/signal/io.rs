//! On-disk dataset layout.
//!
//! A dataset is a directory holding one file per range cell, `cell_<k>.csv`
//! (lines `I,Q`) or `cell_<k>.bin` (little-endian interleaved `f32` I/Q),
//! plus a `meta.json` sidecar declaring the cell roles:
//!
//! ```json
//! {"sample_rate_hz": 1000.0, "primary_cell": 9, "secondary_cells": [8, 10], "polarization": "HH"}
//! ```

use super::{CellRole, ComplexSeries, Dataset, Origin, Polarization, SignalError};
use num_complex::Complex32;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    Csv,
    BinaryF32,
}

impl DatasetFormat {
    fn extension(self) -> &'static str {
        match self {
            DatasetFormat::Csv => "csv",
            DatasetFormat::BinaryF32 => "bin",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    sample_rate_hz: f64,
    primary_cell: Option<usize>,
    #[serde(default)]
    secondary_cells: Vec<usize>,
    polarization: Polarization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<Origin>,
}

fn malformed(path: &Path, reason: impl Into<String>) -> SignalError {
    SignalError::MalformedFile {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn read_csv(path: &Path) -> Result<Vec<Complex32>, SignalError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(i), Some(q), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed(path, format!("line {}: expected `I,Q`", lineno + 1)));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f32>()
                .map_err(|e| malformed(path, format!("line {}: {e}", lineno + 1)))
        };
        out.push(Complex32::new(parse(i)?, parse(q)?));
    }
    Ok(out)
}

fn read_bin(path: &Path) -> Result<Vec<Complex32>, SignalError> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(malformed(
            path,
            format!("{} bytes is not a whole number of I/Q f32 pairs", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex32::new(i, q)
        })
        .collect())
}

/// Lists `cell_<k>.<ext>` files and checks the indices run 0..n.
fn cell_files(dir: &Path, format: DatasetFormat) -> Result<Vec<std::path::PathBuf>, SignalError> {
    let suffix = format!(".{}", format.extension());
    let mut indexed = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(k) = name
            .strip_prefix("cell_")
            .and_then(|rest| rest.strip_suffix(suffix.as_str()))
            .and_then(|k| k.parse::<usize>().ok())
        {
            indexed.push((k, path));
        }
    }
    indexed.sort_by_key(|(k, _)| *k);
    if indexed.is_empty() {
        return Err(malformed(dir, format!("no cell_<k>{suffix} files")));
    }
    for (expected, (k, _)) in indexed.iter().enumerate() {
        if *k != expected {
            return Err(malformed(dir, format!("cell files skip index {expected}")));
        }
    }
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

/// Loads a dataset directory written in `format`, taking cell roles from the
/// `meta.json` sidecar.
pub fn load_dataset(
    dir: impl AsRef<Path>,
    polarization: Polarization,
    format: DatasetFormat,
) -> Result<Dataset, SignalError> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    if !meta_path.is_file() {
        return Err(SignalError::MissingMetadata(format!(
            "{} not found",
            meta_path.display()
        )));
    }
    let meta: Meta = serde_json::from_str(&fs::read_to_string(&meta_path)?)
        .map_err(|e| SignalError::MissingMetadata(format!("{}: {e}", meta_path.display())))?;
    if meta.polarization != polarization {
        return Err(SignalError::PolarizationMismatch {
            requested: polarization,
            declared: meta.polarization,
        });
    }
    let primary = meta
        .primary_cell
        .ok_or_else(|| SignalError::MissingMetadata("primary_cell is not declared".into()))?;

    let files = cell_files(dir, format)?;
    if primary >= files.len() {
        return Err(SignalError::MissingMetadata(format!(
            "primary_cell {primary} but only {} cells present",
            files.len()
        )));
    }
    if meta.secondary_cells.contains(&primary) {
        return Err(SignalError::MissingMetadata(format!(
            "cell {primary} declared both primary and secondary"
        )));
    }

    let mut cells = Vec::with_capacity(files.len());
    for (k, path) in files.iter().enumerate() {
        let samples = match format {
            DatasetFormat::Csv => read_csv(path)?,
            DatasetFormat::BinaryF32 => read_bin(path)?,
        };
        let cell_role = if k == primary {
            CellRole::Primary
        } else if meta.secondary_cells.contains(&k) {
            CellRole::Secondary
        } else {
            CellRole::ClutterOnly
        };
        cells.push(ComplexSeries {
            samples,
            sample_rate_hz: meta.sample_rate_hz,
            cell_index: k,
            cell_role,
        });
    }

    let name = meta.name.clone().unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let dataset = Dataset {
        cells,
        polarization,
        name,
        origin: meta.origin.unwrap_or(Origin::Loaded),
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes `dataset` into `dir` (created if needed) in the given format.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>, format: DatasetFormat) -> Result<(), SignalError> {
    dataset.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    for cell in &dataset.cells {
        let path = dir.join(format!("cell_{}.{}", cell.cell_index, format.extension()));
        match format {
            DatasetFormat::Csv => {
                let mut text = String::with_capacity(cell.len() * 24);
                for c in &cell.samples {
                    // `{}` on f32 is the shortest string that parses back exactly.
                    let _ = writeln!(text, "{},{}", c.re, c.im);
                }
                fs::write(&path, text)?;
            }
            DatasetFormat::BinaryF32 => {
                let mut bytes = Vec::with_capacity(cell.len() * 8);
                for c in &cell.samples {
                    bytes.extend_from_slice(&c.re.to_le_bytes());
                    bytes.extend_from_slice(&c.im.to_le_bytes());
                }
                fs::write(&path, bytes)?;
            }
        }
    }

    let meta = Meta {
        sample_rate_hz: dataset.cells[0].sample_rate_hz,
        primary_cell: dataset
            .cells
            .iter()
            .find(|c| c.cell_role == CellRole::Primary)
            .map(|c| c.cell_index),
        secondary_cells: dataset
            .cells
            .iter()
            .filter(|c| c.cell_role == CellRole::Secondary)
            .map(|c| c.cell_index)
            .collect(),
        polarization: dataset.polarization,
        name: Some(dataset.name.clone()),
        origin: Some(dataset.origin),
    };
    let mut json = serde_json::to_string_pretty(&meta)?;
    json.push('\n');
    fs::write(dir.join(META_FILE), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::synthesize_dataset;

    fn write_cells(dir: &Path, lens: &[usize]) {
        for (k, &n) in lens.iter().enumerate() {
            let text: String = (0..n).map(|i| format!("{i},{}\n", -(i as f32))).collect();
            fs::write(dir.join(format!("cell_{k}.csv")), text).unwrap();
        }
    }

    fn write_meta(dir: &Path, json: &str) {
        fs::write(dir.join(META_FILE), json).unwrap();
    }

    #[test]
    fn primary_role_comes_from_sidecar() {
        let tmp = tempfile::tempdir().unwrap();
        write_cells(tmp.path(), &[16; 14]);
        write_meta(
            tmp.path(),
            r#"{"sample_rate_hz": 1000.0, "primary_cell": 9, "secondary_cells": [8, 10], "polarization": "HH"}"#,
        );
        let d = load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv).unwrap();
        assert_eq!(d.cells.len(), 14);
        assert_eq!(d.cells[9].cell_role, CellRole::Primary);
        assert_eq!(d.cells[8].cell_role, CellRole::Secondary);
        assert_eq!(d.cells[0].cell_role, CellRole::ClutterOnly);
        assert_eq!(d.cells[3].samples[5], Complex32::new(5.0, -5.0));
        assert_eq!(d.origin, Origin::Loaded);
    }

    #[test]
    fn unequal_cell_lengths_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let mut lens = vec![64; 13];
        lens.push(32);
        write_cells(tmp.path(), &lens);
        write_meta(
            tmp.path(),
            r#"{"sample_rate_hz": 1000.0, "primary_cell": 0, "polarization": "HH"}"#,
        );
        let err = load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv).unwrap_err();
        assert!(matches!(err, SignalError::InconsistentCells(_)), "{err}");
    }

    #[test]
    fn missing_sidecar_or_primary() {
        let tmp = tempfile::tempdir().unwrap();
        write_cells(tmp.path(), &[8, 8]);
        let err = load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv).unwrap_err();
        assert!(matches!(err, SignalError::MissingMetadata(_)));

        write_meta(tmp.path(), r#"{"sample_rate_hz": 1000.0, "polarization": "HH"}"#);
        let err = load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv).unwrap_err();
        assert!(matches!(err, SignalError::MissingMetadata(_)));
    }

    #[test]
    fn polarization_must_match() {
        let tmp = tempfile::tempdir().unwrap();
        write_cells(tmp.path(), &[8, 8]);
        write_meta(
            tmp.path(),
            r#"{"sample_rate_hz": 1000.0, "primary_cell": 1, "polarization": "VV"}"#,
        );
        assert!(matches!(
            load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv),
            Err(SignalError::PolarizationMismatch { .. })
        ));
    }

    #[test]
    fn malformed_records() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("cell_0.bin"), [0u8; 12]).unwrap();
        write_meta(
            tmp.path(),
            r#"{"sample_rate_hz": 1000.0, "primary_cell": 0, "polarization": "HH"}"#,
        );
        assert!(matches!(
            load_dataset(tmp.path(), Polarization::HH, DatasetFormat::BinaryF32),
            Err(SignalError::MalformedFile { .. })
        ));

        fs::write(tmp.path().join("cell_0.csv"), "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(
            load_dataset(tmp.path(), Polarization::HH, DatasetFormat::Csv),
            Err(SignalError::MalformedFile { .. })
        ));
    }

    #[test]
    fn round_trip_is_bit_identical_in_both_formats() {
        let d = synthesize_dataset(11, 5.0, 5, 1 << 12, 0.8).unwrap();
        for format in [DatasetFormat::Csv, DatasetFormat::BinaryF32] {
            let tmp = tempfile::tempdir().unwrap();
            save_dataset(&d, tmp.path(), format).unwrap();
            let back = load_dataset(tmp.path(), d.polarization, format).unwrap();
            assert_eq!(back.cells.len(), d.cells.len());
            for (a, b) in d.cells.iter().zip(&back.cells) {
                assert_eq!(a.cell_role, b.cell_role);
                let same = a
                    .samples
                    .iter()
                    .zip(&b.samples)
                    .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
                assert!(same, "cell {} differs after {format:?} round trip", a.cell_index);
            }
            assert_eq!(back, d);
        }
    }
}
