//! Feature file: CSV with header `tie,the,fpar,label,source_cell,start_index`.

use super::{FeatureError, FeatureVector};
use crate::signal::Label;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const FEATURE_CSV_HEADER: &str = "tie,the,fpar,label,source_cell,start_index";

fn label_str(l: Label) -> &'static str {
    match l {
        Label::Target => "+1",
        Label::Clutter => "-1",
    }
}

/// Renders vectors as feature CSV. Floats use the shortest exact
/// representation so that reading the file back is lossless.
pub fn features_to_csv(vectors: &[FeatureVector]) -> String {
    let mut out = String::with_capacity(64 * (vectors.len() + 1));
    out.push_str(FEATURE_CSV_HEADER);
    out.push('\n');
    for v in vectors {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            v.tie,
            v.the,
            v.fpar,
            label_str(v.label),
            v.source_cell,
            v.start_index
        );
    }
    out
}

pub fn write_features(path: impl AsRef<Path>, vectors: &[FeatureVector]) -> Result<(), FeatureError> {
    fs::write(path, features_to_csv(vectors))?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>, FeatureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let bad = |line: usize, reason: String| FeatureError::Malformed {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == FEATURE_CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{FEATURE_CSV_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad(lineno, format!("expected 6 fields, got {}", fields.len())));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|e| bad(lineno, format!("{s:?}: {e}")));
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(lineno, format!("{s:?}: {e}")));
        let label = fields[3]
            .trim_start_matches('+')
            .parse::<i8>()
            .ok()
            .and_then(Label::from_i8)
            .ok_or_else(|| bad(lineno, format!("label must be +1 or -1, got {:?}", fields[3])))?;
        out.push(FeatureVector {
            tie: float(fields[0])?,
            the: float(fields[1])?,
            fpar: float(fields[2])?,
            label,
            source_cell: int(fields[4])?,
            start_index: int(fields[5])?,
        });
    }
    Ok(out)
}
