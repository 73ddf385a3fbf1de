//! Experimental protocol: train/test split, detection probability, FAR
//! sweeps and the single-feature Hurst-threshold baseline.
//!
//! All clutter goes to training (FAR is a training-set quantity) and the
//! targets are split, so the test set holds targets only and `p_d` is the
//! sole test metric.

use crate::far::{self, ControllerTrace, FarError, FarTarget};
use crate::features::{apply_normalization, fit_normalization, FeatureError, FeatureVector};
use crate::signal::{Label, Polarization};
use crate::svm::{KernelConfig, SvmModel, TrainConfig, Trainer};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no target samples")]
    NoTargets,
    #[error("no clutter samples")]
    NoClutter,
    #[error("test set contains no target samples")]
    EmptyTestSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Far(#[from] FarError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClutterPolicy {
    #[default]
    AllToTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub target_train_fraction: f64,
    #[serde(default)]
    pub clutter_policy: ClutterPolicy,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            target_train_fraction: 0.5,
            clutter_policy: ClutterPolicy::AllToTrain,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<FeatureVector>,
    pub test: Vec<FeatureVector>,
}

/// Deterministic split: all clutter to `train`; targets are shuffled with
/// `spec.seed` and the first `floor(fraction · n)` go to `train`. Both
/// halves keep the input order.
pub fn split(vectors: &[FeatureVector], spec: &SplitSpec) -> Result<Split, EvalError> {
    let f = spec.target_train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(EvalError::InvalidParameter(format!(
            "target_train_fraction must lie in (0, 1), got {f}"
        )));
    }
    let targets: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].label == Label::Target).collect();
    if targets.is_empty() {
        return Err(EvalError::NoTargets);
    }
    if targets.len() == vectors.len() {
        return Err(EvalError::NoClutter);
    }
    let mut shuffled = targets;
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n_train = (f * shuffled.len() as f64).floor() as usize;
    let mut to_train = vec![true; vectors.len()];
    for &i in &shuffled[n_train..] {
        to_train[i] = false;
    }
    let (train, test) = vectors.iter().zip(to_train).fold(
        (Vec::new(), Vec::new()),
        |(mut tr, mut te), (v, t)| {
            if t {
                tr.push(*v);
            } else {
                te.push(*v);
            }
            (tr, te)
        },
    );
    Ok(Split { train, test })
}

/// Number of target-labeled vectors and how many of them `detect` accepts.
fn count_detections(test: &[FeatureVector], detect: impl Fn(&FeatureVector) -> bool) -> (usize, usize) {
    let targets = test.iter().filter(|f| f.label == Label::Target);
    targets.fold((0, 0), |(hit, n), f| (hit + usize::from(detect(f)), n + 1))
}

/// Fraction of target-labeled `test` vectors the model calls target.
pub fn detection_probability(model: &SvmModel, test: &[FeatureVector]) -> Result<f64, EvalError> {
    let (hit, n) = count_detections(test, |f| model.decide(f).label == Label::Target);
    if n == 0 {
        return Err(EvalError::EmptyTestSet);
    }
    Ok(hit as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Achieved training false alarm rate.
    pub p_f: f64,
    pub p_d: f64,
    pub target_p_f: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub target_p_f: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    /// `"svm"` for the proposed detector, `"hurst"` for the baseline.
    pub detector: String,
    pub p_d: f64,
    #[serde(rename = "p_F_train")]
    pub p_f_train: f64,
    pub target_p_f: f64,
    /// Absent for the baseline.
    pub beta0_final: Option<f64>,
    pub beta1: Option<f64>,
    /// Decision threshold on THE; baseline only.
    #[serde(default)]
    pub threshold: Option<f64>,
    pub converged: bool,
    pub n_detected: usize,
    pub n_test_targets: usize,
    pub n_false_alarms: usize,
    pub n_train_clutter: usize,
    pub dataset_name: String,
    pub polarization: Option<Polarization>,
    pub roc_points: Vec<RocPoint>,
    #[serde(default)]
    pub failures: Vec<SweepFailure>,
}

impl DetectorReport {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    /// ROC points as CSV `p_f,p_d,converged`.
    pub fn roc_csv(&self) -> String {
        let mut s = String::from("p_f,p_d,converged\n");
        for p in &self.roc_points {
            let _ = writeln!(s, "{},{},{}", p.p_f, p.p_d, p.converged);
        }
        s
    }
}

/// A proposed-detector model fitted by the FAR controller, together with the
/// normalization it was trained under.
#[derive(Debug, Clone)]
pub struct FittedDetector {
    pub model: SvmModel,
    pub trace: ControllerTrace,
}

/// Normalizes `training`, runs the controller and returns a model that
/// classifies raw feature vectors.
pub fn fit_detector(
    training: &[FeatureVector],
    kernel: &KernelConfig,
    target: &FarTarget,
    solver: &TrainConfig,
) -> Result<FittedDetector, EvalError> {
    let mut sweep = Sweeper::new(training, kernel, solver)?;
    sweep.fit(target)
}

/// Shares one normalization and one trainer (kernel rows, warm starts)
/// across several controller runs on the same training set.
struct Sweeper {
    normalized: Vec<FeatureVector>,
    stats: crate::features::NormalizationStats,
    trainer: Trainer,
    solver: TrainConfig,
}

impl Sweeper {
    fn new(training: &[FeatureVector], kernel: &KernelConfig, solver: &TrainConfig) -> Result<Self, EvalError> {
        if !training.iter().any(|f| f.label == Label::Clutter) {
            return Err(EvalError::NoClutter);
        }
        if !training.iter().any(|f| f.label == Label::Target) {
            return Err(EvalError::NoTargets);
        }
        let stats = fit_normalization(training)?;
        let normalized: Vec<FeatureVector> = training.iter().map(|f| apply_normalization(f, &stats)).collect();
        let trainer = Trainer::new(&normalized, *kernel, solver.cache_mb).map_err(FarError::from)?;
        Ok(Sweeper {
            normalized,
            stats,
            trainer,
            solver: *solver,
        })
    }

    fn fit(&mut self, target: &FarTarget) -> Result<FittedDetector, EvalError> {
        let trace = far::control(&mut self.trainer, &self.normalized, target, &self.solver)?;
        let model = trace.final_model.clone().with_norm_stats(self.stats);
        Ok(FittedDetector { model, trace })
    }
}

fn report_for(
    fitted: &FittedDetector,
    training: &[FeatureVector],
    test: &[FeatureVector],
    target: &FarTarget,
) -> Result<DetectorReport, EvalError> {
    let (hit, n) = count_detections(test, |f| fitted.model.decide(f).label == Label::Target);
    if n == 0 {
        return Err(EvalError::EmptyTestSet);
    }
    let it = fitted.trace.final_iteration();
    Ok(DetectorReport {
        detector: "svm".into(),
        p_d: hit as f64 / n as f64,
        p_f_train: it.p_f,
        target_p_f: target.p_f,
        beta0_final: Some(it.beta0),
        beta1: Some(target.beta1),
        threshold: None,
        converged: fitted.trace.converged,
        n_detected: hit,
        n_test_targets: n,
        n_false_alarms: it.n_clutter_errors,
        n_train_clutter: training.iter().filter(|f| f.label == Label::Clutter).count(),
        dataset_name: String::new(),
        polarization: None,
        roc_points: Vec::new(),
        failures: Vec::new(),
    })
}

/// Runs the controller at every grid point. The headline fields of the
/// report describe the first grid point that succeeded; per-point failures
/// are recorded and the sweep continues.
pub fn roc_sweep(
    training: &[FeatureVector],
    test: &[FeatureVector],
    kernel: &KernelConfig,
    p_f_grid: &[f64],
) -> Result<DetectorReport, EvalError> {
    roc_sweep_using(training, test, kernel, p_f_grid, &FarTarget::default(), &TrainConfig::default())
}

/// As [`roc_sweep`], taking every controller setting except `p_f` from
/// `base` and the solver settings from `solver`.
pub fn roc_sweep_using(
    training: &[FeatureVector],
    test: &[FeatureVector],
    kernel: &KernelConfig,
    p_f_grid: &[f64],
    base: &FarTarget,
    solver: &TrainConfig,
) -> Result<DetectorReport, EvalError> {
    if p_f_grid.is_empty() {
        return Err(EvalError::InvalidParameter("empty p_f grid".into()));
    }
    if let Some(p) = p_f_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(EvalError::InvalidParameter(format!("p_f grid values must lie in (0, 1), got {p}")));
    }
    if !test.iter().any(|f| f.label == Label::Target) {
        return Err(EvalError::EmptyTestSet);
    }
    let mut sweeper = Sweeper::new(training, kernel, solver)?;
    let mut headline: Option<DetectorReport> = None;
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &p_f in p_f_grid {
        let target = FarTarget { p_f, ..*base };
        match sweeper.fit(&target).and_then(|f| report_for(&f, training, test, &target)) {
            Ok(r) => {
                points.push(RocPoint {
                    p_f: r.p_f_train,
                    p_d: r.p_d,
                    target_p_f: p_f,
                    converged: r.converged,
                });
                headline.get_or_insert(r);
            }
            Err(e) => failures.push(SweepFailure {
                target_p_f: p_f,
                message: e.to_string(),
            }),
        }
    }
    let Some(mut report) = headline else {
        let msg = failures.first().map(|f| f.message.clone()).unwrap_or_default();
        return Err(EvalError::InvalidParameter(format!("every sweep point failed: {msg}")));
    };
    points.sort_by(|a, b| a.p_f.total_cmp(&b.p_f).then(a.target_p_f.total_cmp(&b.target_p_f)));
    report.roc_points = points;
    report.failures = failures;
    Ok(report)
}

/// Threshold on THE with clutter-training exceedance rate at most `p_f`:
/// the empirical `(1 − p_f)` quantile of the clutter values. `p_f = 1`
/// gives a threshold below every value, `p_f = 0` the clutter maximum.
pub fn hurst_threshold(training: &[FeatureVector], p_f: f64) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&p_f) {
        return Err(EvalError::InvalidParameter(format!("p_f must lie in [0, 1], got {p_f}")));
    }
    let mut values: Vec<f64> = training.iter().filter(|f| f.label == Label::Clutter).map(|f| f.the).collect();
    if values.is_empty() {
        return Err(EvalError::NoClutter);
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let above = (p_f * n as f64).floor() as usize;
    Ok(if above >= n { f64::MIN } else { values[n - 1 - above] })
}

/// Single-feature baseline: declare target when THE exceeds the clutter
/// `(1 − p_f)` quantile.
pub fn hurst_threshold_baseline(
    training: &[FeatureVector],
    test: &[FeatureVector],
    p_f: f64,
) -> Result<DetectorReport, EvalError> {
    let threshold = hurst_threshold(training, p_f)?;
    let (hit, n) = count_detections(test, |f| f.the > threshold);
    if n == 0 {
        return Err(EvalError::EmptyTestSet);
    }
    let clutter = training.iter().filter(|f| f.label == Label::Clutter);
    let (fa, nc) = clutter.fold((0, 0), |(fa, nc), f| (fa + usize::from(f.the > threshold), nc + 1));
    let p_d = hit as f64 / n as f64;
    let p_f_train = fa as f64 / nc as f64;
    Ok(DetectorReport {
        detector: "hurst".into(),
        p_d,
        p_f_train,
        target_p_f: p_f,
        beta0_final: None,
        beta1: None,
        threshold: Some(threshold),
        converged: true,
        n_detected: hit,
        n_test_targets: n,
        n_false_alarms: fa,
        n_train_clutter: nc,
        dataset_name: String::new(),
        polarization: None,
        roc_points: vec![RocPoint {
            p_f: p_f_train,
            p_d,
            target_p_f: p_f,
            converged: true,
        }],
        failures: Vec::new(),
    })
}

/// Baseline evaluated at each grid value.
pub fn hurst_roc(training: &[FeatureVector], test: &[FeatureVector], p_f_grid: &[f64]) -> Result<DetectorReport, EvalError> {
    let first = *p_f_grid
        .first()
        .ok_or_else(|| EvalError::InvalidParameter("empty p_f grid".into()))?;
    let mut report = hurst_threshold_baseline(training, test, first)?;
    let mut points = Vec::new();
    for &p in p_f_grid {
        points.extend(hurst_threshold_baseline(training, test, p)?.roc_points);
    }
    points.sort_by(|a, b| a.p_f.total_cmp(&b.p_f).then(a.target_p_f.total_cmp(&b.target_p_f)));
    report.roc_points = points;
    Ok(report)
}

/// Mean of per-dataset detection probabilities (not pooled over samples).
pub fn average_detection_probability(reports: &[DetectorReport]) -> Option<f64> {
    if reports.is_empty() {
        return None;
    }
    Some(reports.iter().map(|r| r.p_d).sum::<f64>() / reports.len() as f64)
}
