//! Soft-margin kernel SVM with separate slack penalties per class.
//!
//! Clutter slacks are weighted by `beta0` and target slacks by `beta1`, so
//! the dual box is `0 ≤ α_i ≤ beta0` for clutter and `0 ≤ α_i ≤ beta1` for
//! targets. With `beta0 == beta1` this is the ordinary single-penalty SVM.
//! The decision rule is `g(F) = Σ α_i y_i k(SV_i, F) − b`, target iff
//! `g > 0`; a tie at exactly zero is called clutter.

mod kernel;
mod smo;

pub use kernel::{rbf_kernel, KernelConfig, KernelForm};

use crate::features::{FeatureVector, NormalizationStats};
use crate::signal::Label;
use kernel::KernelRows;
use serde::{Deserialize, Serialize};
use smo::{repair_start, SmoParams};
use std::path::Path;
use thiserror::Error;

/// Default kernel-row cache budget.
pub const DEFAULT_CACHE_MB: usize = 512;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training data must contain both targets and clutter")]
    SingleClassData,
    #[error("SMO stopped after {iterations} pair updates with KKT violation {max_violation:e}")]
    NonConvergence { iterations: usize, max_violation: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Penalty on clutter slacks.
    pub beta0: f64,
    /// Penalty on target slacks.
    pub beta1: f64,
    pub kkt_tol: f64,
    /// Pair-update budget in units of the training-set size.
    pub max_passes: usize,
    pub cache_mb: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta0: 1.0,
            beta1: 1.0,
            kkt_tol: 1e-3,
            max_passes: 10,
            cache_mb: DEFAULT_CACHE_MB,
        }
    }
}

impl TrainConfig {
    pub fn with_penalties(beta0: f64, beta1: f64) -> Self {
        TrainConfig {
            beta0,
            beta1,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        for (name, v) in [("beta0", self.beta0), ("beta1", self.beta1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SvmError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.kkt_tol > 0.0 && self.kkt_tol < 1.0) {
            return Err(SvmError::InvalidParameter(format!(
                "kkt_tol must lie in (0, 1), got {}",
                self.kkt_tol
            )));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidParameter("max_passes must be >= 1".into()));
        }
        Ok(())
    }

    /// Box bound for a point of class `label`.
    pub fn penalty(&self, label: Label) -> f64 {
        match label {
            Label::Clutter => self.beta0,
            Label::Target => self.beta1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub beta0: f64,
    pub beta1: f64,
    pub converged: bool,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub max_violation: f64,
}

/// A trained classifier in dual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: KernelConfig,
    pub bias: f64,
    /// Support vectors in normalized feature space.
    pub support_vectors: Vec<[f64; 3]>,
    pub alphas: Vec<f64>,
    pub labels: Vec<Label>,
    pub norm_stats: NormalizationStats,
    pub training_meta: TrainingMeta,
    /// Position of every support vector in the training set it came from.
    #[serde(skip)]
    pub sv_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub label: Label,
    /// `g(F)`; positive on the target side.
    pub margin: f64,
}

impl SvmModel {
    /// `g(F)` for a point already in normalized feature space.
    pub fn decision_value(&self, f: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for ((sv, a), l) in self.support_vectors.iter().zip(&self.alphas).zip(&self.labels) {
            acc += a * l.sign() * self.kernel.eval(sv, f);
        }
        acc - self.bias
    }

    /// Classifies a raw (unnormalized) feature vector.
    pub fn decide(&self, f: &FeatureVector) -> Decision {
        let margin = self.decision_value(&self.norm_stats.apply(f.as_array()));
        Decision {
            label: if margin > 0.0 { Label::Target } else { Label::Clutter },
            margin,
        }
    }

    pub fn decide_all(&self, vectors: &[FeatureVector]) -> Vec<Decision> {
        use rayon::prelude::*;
        vectors.par_iter().map(|f| self.decide(f)).collect()
    }

    pub fn with_norm_stats(mut self, stats: NormalizationStats) -> Self {
        self.norm_stats = stats;
        self
    }

    pub fn converged(&self) -> bool {
        self.training_meta.converged
    }

    /// `Err(NonConvergence)` if SMO hit its update budget.
    pub fn ensure_converged(&self) -> Result<(), SvmError> {
        if self.converged() {
            Ok(())
        } else {
            Err(SvmError::NonConvergence {
                iterations: self.training_meta.iterations,
                max_violation: self.training_meta.max_violation,
            })
        }
    }

    /// Dual objective `Σ α_i − ½ Σ α_i α_j y_i y_j k(SV_i, SV_j)`.
    pub fn dual_objective(&self) -> f64 {
        let n = self.alphas.len();
        let mut quad = 0.0;
        for i in 0..n {
            let ai = self.alphas[i] * self.labels[i].sign();
            for j in 0..n {
                let aj = self.alphas[j] * self.labels[j].sign();
                quad += ai * aj * self.kernel.eval(&self.support_vectors[i], &self.support_vectors[j]);
            }
        }
        self.alphas.iter().sum::<f64>() - 0.5 * quad
    }

    /// Dual coefficients expanded back onto a training set of size `n`.
    pub fn full_alphas(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&i, &a) in self.sv_indices.iter().zip(&self.alphas) {
            out[i] = a;
        }
        out
    }

    /// Checks dual feasibility and KKT conditions against the training set
    /// (already normalized) the model was fitted on.
    pub fn kkt_report(&self, training: &[FeatureVector]) -> KktReport {
        let alphas = self.full_alphas(training.len());
        let meta = &self.training_meta;
        let mut report = KktReport {
            equality_residual: self
                .alphas
                .iter()
                .zip(&self.labels)
                .map(|(a, l)| a * l.sign())
                .sum::<f64>()
                .abs(),
            box_violations: 0,
            max_kkt_violation: 0.0,
        };
        for (f, &a) in training.iter().zip(&alphas) {
            let cap = match f.label {
                Label::Clutter => meta.beta0,
                Label::Target => meta.beta1,
            };
            if a < 0.0 || a > cap {
                report.box_violations += 1;
            }
            let yg = f.label.sign() * self.decision_value(&f.as_array());
            let v = if a == 0.0 {
                (1.0 - yg).max(0.0)
            } else if a >= cap {
                (yg - 1.0).max(0.0)
            } else {
                (yg - 1.0).abs()
            };
            report.max_kkt_violation = report.max_kkt_violation.max(v);
        }
        report
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<(), SvmError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, SvmError> {
        let model: SvmModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let n = model.alphas.len();
        if n == 0 || model.support_vectors.len() != n || model.labels.len() != n {
            return Err(SvmError::InvalidParameter(
                "model lists must be non-empty and of equal length".into(),
            ));
        }
        model.kernel.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `|Σ α_i y_i|`.
    pub equality_residual: f64,
    /// Number of `α_i` outside `[0, C_i]`.
    pub box_violations: usize,
    /// Largest KKT residual over all training points.
    pub max_kkt_violation: f64,
}

/// Reusable trainer over one fixed, normalized training set.
///
/// Kernel rows depend only on the points, not on the penalties, so they are
/// cached across successive fits. A fit may also start from the previous
/// solution, repaired to the new box bounds.
///
/// Warm starts keep, per class, the unscaled gradient contribution of the
/// coefficients sitting at their upper bound, `S_c = Σ_{j ∈ c, α_j = C_c} Q_·j`.
/// When only the bounds move, `Qα` is rebuilt as `β0 S_0 + β1 S_1` plus the
/// free coefficients, so kernel rows are recomputed only for points whose
/// bound status changed.
pub struct Trainer {
    labels: Vec<Label>,
    y: Vec<f64>,
    rows: KernelRows,
    last_alpha: Option<Vec<f64>>,
    last_upper: Vec<f64>,
    at_upper: Vec<bool>,
    bound_grad: [Vec<f64>; 2],
    margins: Vec<f64>,
}

fn class_slot(l: Label) -> usize {
    match l {
        Label::Clutter => 0,
        Label::Target => 1,
    }
}

impl Trainer {
    pub fn new(data: &[FeatureVector], kernel: KernelConfig, cache_mb: usize) -> Result<Self, SvmError> {
        kernel.validate()?;
        if data.len() < 2 {
            return Err(SvmError::InvalidParameter(format!(
                "need at least 2 training vectors, got {}",
                data.len()
            )));
        }
        let has = |l| data.iter().any(|f| f.label == l);
        if !has(Label::Target) || !has(Label::Clutter) {
            return Err(SvmError::SingleClassData);
        }
        let points: Vec<[f64; 3]> = data.iter().map(|f| f.as_array()).collect();
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SvmError::InvalidParameter("non-finite training feature".into()));
        }
        let n = data.len();
        let labels: Vec<Label> = data.iter().map(|f| f.label).collect();
        Ok(Trainer {
            y: labels.iter().map(|l| l.sign()).collect(),
            labels,
            rows: KernelRows::new(points, kernel, cache_mb.saturating_mul(1 << 20)),
            last_alpha: None,
            last_upper: Vec::new(),
            at_upper: vec![false; n],
            bound_grad: [vec![0.0; n], vec![0.0; n]],
            margins: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Fits with the penalties in `config`. With `warm_start`, SMO starts
    /// from the previous fit's coefficients.
    pub fn fit(&mut self, config: &TrainConfig, warm_start: bool) -> Result<SvmModel, SvmError> {
        self.fit_traced(config, warm_start, None)
    }

    /// Decision values `g` of the training points under the latest fit,
    /// recovered from the solver's gradient rather than re-evaluated.
    pub fn training_margins(&self) -> &[f64] {
        &self.margins
    }

    fn warm_gradient(&mut self, alpha: &[f64], upper: &[f64]) -> Vec<f64> {
        let n = self.len();
        for j in 0..n {
            let now = alpha[j] >= upper[j];
            if now != self.at_upper[j] {
                let row = self.rows.row(j);
                let s = if now { self.y[j] } else { -self.y[j] };
                let acc = &mut self.bound_grad[class_slot(self.labels[j])];
                for t in 0..n {
                    acc[t] += self.y[t] * s * row[t];
                }
                self.at_upper[j] = now;
            }
        }
        let cap = |slot: usize| {
            (0..n)
                .find(|&j| class_slot(self.labels[j]) == slot)
                .map_or(0.0, |j| upper[j])
        };
        let (c0, c1) = (cap(0), cap(1));
        let mut grad: Vec<f64> = (0..n)
            .map(|t| c0 * self.bound_grad[0][t] + c1 * self.bound_grad[1][t] - 1.0)
            .collect();
        for j in 0..n {
            if alpha[j] > 0.0 && !self.at_upper[j] {
                let row = self.rows.row(j);
                let s = alpha[j] * self.y[j];
                for t in 0..n {
                    grad[t] += self.y[t] * s * row[t];
                }
            }
        }
        grad
    }

    pub(crate) fn fit_traced(
        &mut self,
        config: &TrainConfig,
        warm_start: bool,
        trace: Option<&mut Vec<f64>>,
    ) -> Result<SvmModel, SvmError> {
        config.validate()?;
        let n = self.len();
        let upper: Vec<f64> = self.labels.iter().map(|&l| config.penalty(l)).collect();
        let (alpha, grad) = match (self.last_alpha.take(), warm_start) {
            (Some(mut a), true) => {
                repair_start(&mut a, &self.y, &upper, &self.last_upper);
                let g = self.warm_gradient(&a, &upper);
                (a, g)
            }
            _ => (vec![0.0; n], vec![-1.0; n]),
        };
        let params = SmoParams {
            y: &self.y,
            upper: &upper,
            tol: config.kkt_tol,
            max_iterations: config.max_passes.saturating_mul(n),
        };
        let res = smo::solve(&mut self.rows, &params, alpha, grad, trace);

        self.margins = (0..n).map(|t| self.y[t] * (res.grad[t] + 1.0) - res.bias).collect();
        let points = self.rows.points();
        let sv_indices: Vec<usize> = (0..n).filter(|&i| res.alpha[i] > 0.0).collect();
        let model = SvmModel {
            kernel: self.rows.kernel(),
            bias: res.bias,
            support_vectors: sv_indices.iter().map(|&i| points[i]).collect(),
            alphas: sv_indices.iter().map(|&i| res.alpha[i]).collect(),
            labels: sv_indices.iter().map(|&i| self.labels[i]).collect(),
            norm_stats: NormalizationStats::identity(),
            training_meta: TrainingMeta {
                beta0: config.beta0,
                beta1: config.beta1,
                converged: res.converged,
                iterations: res.iterations,
                max_violation: res.max_violation,
            },
            sv_indices,
        };
        self.last_alpha = Some(res.alpha);
        self.last_upper = upper;
        Ok(model)
    }

    /// Kernel rows computed so far (cache misses).
    pub fn kernel_row_evaluations(&self) -> u64 {
        self.rows.misses
    }
}

/// Trains on already-normalized `data`. The returned model carries identity
/// normalization; attach the real statistics with
/// [`SvmModel::with_norm_stats`] before classifying raw features.
///
/// Hitting the update budget is not an error: the model is returned with
/// `training_meta.converged == false` and the final KKT violation.
pub fn train(data: &[FeatureVector], kernel: &KernelConfig, config: &TrainConfig) -> Result<SvmModel, SvmError> {
    config.validate()?;
    Trainer::new(data, *kernel, config.cache_mb)?.fit(config, false)
}
