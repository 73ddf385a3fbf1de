use crate::{usage, CliError};
use serde::{Deserialize, Deserializer, Serialize};
use std::path::{Path, PathBuf};

/// Flat parameter bundle shared by all subcommands. Keys are the snake_case
/// spellings of the command-line flags; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // generate
    pub seed: Option<u64>,
    pub scr_db: Option<f64>,
    pub cells: Option<usize>,
    pub samples: Option<usize>,
    pub clutter_shape: Option<f64>,
    pub polarization: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    // extract
    pub input: Option<PathBuf>,
    pub step: Option<usize>,
    pub window: Option<usize>,
    pub k_bins: Option<usize>,
    pub tau_grid: Option<Vec<usize>>,
    // train / evaluate
    #[serde(deserialize_with = "one_or_many")]
    pub features: Vec<PathBuf>,
    pub pf: Option<f64>,
    pub eta: Option<f64>,
    pub beta_h: Option<f64>,
    pub beta_l: Option<f64>,
    pub beta1: Option<f64>,
    pub max_iters: Option<usize>,
    pub delta: Option<f64>,
    pub kernel: Option<String>,
    pub kkt_tol: Option<f64>,
    pub max_passes: Option<usize>,
    pub cache_mb: Option<usize>,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub model: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub pf_grid: Option<Vec<f64>>,
    pub baseline: Option<String>,
    pub report: Option<PathBuf>,
    pub roc: Option<PathBuf>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PathBuf>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PathBuf),
        Many(Vec<PathBuf>),
    }
    Ok(match Option::<OneOrMany>::deserialize(d)? {
        None => Vec::new(),
        Some(OneOrMany::One(p)) => vec![p],
        Some(OneOrMany::Many(v)) => v,
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("--config {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_accepts_string_or_list() {
        let a: RunConfig = serde_json::from_str(r#"{"features": "a.csv"}"#).unwrap();
        assert_eq!(a.features, vec![PathBuf::from("a.csv")]);
        let b: RunConfig = serde_json::from_str(r#"{"features": ["a.csv", "b.csv"], "pf": 0.01}"#).unwrap();
        assert_eq!(b.features.len(), 2);
        assert_eq!(b.pf, Some(0.01));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"p_f": 0.01}"#).is_err());
    }
}
