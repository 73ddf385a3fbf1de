//! False-alarm-rate control: bisection on the clutter penalty `beta0`
//! until the training false alarm rate `P_F` is within `eta` of the
//! requested `p_f`.
//!
//! The branch directions follow the published listing: when `P_F < p_f` the
//! upper end of the bracket moves down to `beta0`, when `P_F > p_f` the lower
//! end moves up. Since a larger clutter penalty means fewer false alarms,
//! this walks `beta0` towards the target. The trace records every step so a
//! dataset on which that reading fails is visible rather than papered over.

use crate::features::FeatureVector;
use crate::signal::Label;
use crate::svm::{KernelConfig, SvmError, SvmModel, TrainConfig, Trainer};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Largest upper bracket end reached by doubling.
pub const MAX_BETA_H: f64 = 1024.0;

/// Bracket width below which the bisection is considered exhausted.
const MIN_BRACKET: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum FarError {
    #[error("invalid FAR target: {0}")]
    InvalidTarget(String),
    #[error("training set has no clutter samples")]
    NoClutterSamples,
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarTarget {
    pub p_f: f64,
    pub eta: f64,
    pub beta_h: f64,
    pub beta_l: f64,
    pub beta1: f64,
    pub max_iters: usize,
}

impl Default for FarTarget {
    fn default() -> Self {
        FarTarget {
            p_f: 0.01,
            eta: 1e-4,
            beta_h: 2.0,
            beta_l: 0.0,
            beta1: 1.0,
            max_iters: 50,
        }
    }
}

impl FarTarget {
    pub fn new(p_f: f64, eta: f64) -> Self {
        FarTarget {
            p_f,
            eta,
            ..FarTarget::default()
        }
    }

    pub fn validate(&self) -> Result<(), FarError> {
        let bad = |m: String| Err(FarError::InvalidTarget(m));
        if !(self.p_f > 0.0 && self.p_f < 1.0) {
            return bad(format!("p_f must lie in (0, 1), got {}", self.p_f));
        }
        if !(self.eta > 0.0) || self.eta.is_nan() {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.beta_l >= 0.0 && self.beta_l.is_finite()) {
            return bad(format!("beta_l must be non-negative, got {}", self.beta_l));
        }
        if !(self.beta_h > self.beta_l && self.beta_h.is_finite()) {
            return bad(format!(
                "beta_h ({}) must be finite and exceed beta_l ({})",
                self.beta_h, self.beta_l
            ));
        }
        if !(self.beta1 > 0.0 && self.beta1.is_finite()) {
            return bad(format!("beta1 must be positive, got {}", self.beta1));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Probing the upper bracket end before bisection.
    Bracket,
    Bisect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub beta0: f64,
    #[serde(rename = "p_F")]
    pub p_f: f64,
    #[serde(rename = "errors")]
    pub n_clutter_errors: usize,
    pub beta_l: f64,
    pub beta_h: f64,
    pub phase: Phase,
    /// Whether SMO met its KKT tolerance for this fit.
    pub svm_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControllerWarning {
    /// `eta` is finer than one clutter sample's worth of FAR.
    InfeasibleTolerance { eta: f64, granularity: f64 },
    /// Doubling stopped at [`MAX_BETA_H`] with `P_F` still above target.
    BracketCapped { beta_h: f64, p_f: f64 },
    /// One or more fits hit the SMO update budget.
    SvmNotConverged { fits: usize },
}

#[derive(Debug, Clone)]
pub struct ControllerTrace {
    pub target: FarTarget,
    pub iterations: Vec<Iteration>,
    pub converged: bool,
    /// Index into `iterations` of the returned model.
    pub best: usize,
    pub final_model: SvmModel,
    pub warnings: Vec<ControllerWarning>,
    pub n_clutter: usize,
}

#[derive(Serialize)]
struct TraceFile<'a> {
    target: &'a FarTarget,
    iterations: &'a [Iteration],
    converged: bool,
    best_iteration: usize,
    #[serde(rename = "p_F")]
    final_p_f: f64,
    beta0: f64,
    n_clutter: usize,
    warnings: &'a [ControllerWarning],
    model_ref: Option<&'a str>,
}

impl ControllerTrace {
    pub fn final_iteration(&self) -> &Iteration {
        &self.iterations[self.best]
    }

    /// Achieved training false alarm rate of the returned model.
    pub fn achieved_p_f(&self) -> f64 {
        self.final_iteration().p_f
    }

    pub fn to_json(&self, model_ref: Option<&str>) -> Result<String, FarError> {
        let it = self.final_iteration();
        let file = TraceFile {
            target: &self.target,
            iterations: &self.iterations,
            converged: self.converged,
            best_iteration: self.best,
            final_p_f: it.p_f,
            beta0: it.beta0,
            n_clutter: self.n_clutter,
            warnings: &self.warnings,
            model_ref,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save_json(&self, path: impl AsRef<Path>, model_ref: Option<&str>) -> Result<(), FarError> {
        std::fs::write(path, self.to_json(model_ref)?)?;
        Ok(())
    }
}

/// Fraction of clutter-labeled `training` vectors the model calls target.
pub fn empirical_far(model: &SvmModel, training: &[FeatureVector]) -> Result<f64, FarError> {
    let (errors, total) = clutter_errors(model, training);
    if total == 0 {
        return Err(FarError::NoClutterSamples);
    }
    Ok(errors as f64 / total as f64)
}

fn clutter_errors(model: &SvmModel, training: &[FeatureVector]) -> (usize, usize) {
    use rayon::prelude::*;
    training
        .par_iter()
        .filter(|f| f.label == Label::Clutter)
        .map(|f| (usize::from(model.decide(f).label == Label::Target), 1))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Runs the controller with default solver settings. `training` must already
/// be normalized; the returned model carries identity normalization.
pub fn fit_with_far(
    training: &[FeatureVector],
    kernel: &KernelConfig,
    target: &FarTarget,
) -> Result<ControllerTrace, FarError> {
    fit_with_far_using(training, kernel, target, &TrainConfig::default())
}

/// As [`fit_with_far`], with the solver settings (tolerance, update budget,
/// cache) taken from `solver`; its penalties are ignored.
pub fn fit_with_far_using(
    training: &[FeatureVector],
    kernel: &KernelConfig,
    target: &FarTarget,
    solver: &TrainConfig,
) -> Result<ControllerTrace, FarError> {
    target.validate()?;
    if !training.iter().any(|f| f.label == Label::Clutter) {
        return Err(FarError::NoClutterSamples);
    }
    let mut trainer = Trainer::new(training, *kernel, solver.cache_mb)?;
    control(&mut trainer, training, target, solver)
}

/// Controller loop over an existing trainer, so that kernel rows and the
/// last solution carry over between calls (e.g. along a ROC sweep).
pub fn control(
    trainer: &mut Trainer,
    training: &[FeatureVector],
    target: &FarTarget,
    solver: &TrainConfig,
) -> Result<ControllerTrace, FarError> {
    target.validate()?;
    if trainer.len() != training.len() {
        return Err(FarError::InvalidTarget("trainer was built on a different training set".into()));
    }
    let n_clutter = training.iter().filter(|f| f.label == Label::Clutter).count();
    if n_clutter == 0 {
        return Err(FarError::NoClutterSamples);
    }
    let mut warnings = Vec::new();
    let granularity = 1.0 / n_clutter as f64;
    if target.eta < granularity {
        warnings.push(ControllerWarning::InfeasibleTolerance {
            eta: target.eta,
            granularity,
        });
    }

    let mut run = Run {
        trainer,
        training,
        target,
        solver,
        n_clutter,
        iterations: Vec::new(),
        best: None,
        warm: false,
    };
    let hit = |p: f64| (p - target.p_f).abs() <= target.eta;

    let (mut beta_l, mut beta_h) = (target.beta_l, target.beta_h);
    let mut converged = false;

    // Make sure P_F(beta_h) <= p_f so the bracket holds the target.
    loop {
        let p = run.step(beta_h, beta_l, beta_h, Phase::Bracket)?;
        if hit(p) {
            converged = true;
            break;
        }
        if p < target.p_f || run.exhausted() {
            break;
        }
        if beta_h >= MAX_BETA_H {
            warnings.push(ControllerWarning::BracketCapped { beta_h, p_f: p });
            break;
        }
        beta_h = (2.0 * beta_h).min(MAX_BETA_H);
    }

    let mut beta0 = 0.5 * (beta_h + beta_l);
    while !converged && !run.exhausted() {
        let p = run.step(beta0, beta_l, beta_h, Phase::Bisect)?;
        if hit(p) {
            converged = true;
            break;
        }
        if p < target.p_f {
            beta_h = beta0;
        } else {
            beta_l = beta0;
        }
        let next = 0.5 * (beta_h + beta_l);
        if beta_h - beta_l < MIN_BRACKET || next == beta0 || next <= 0.0 {
            break;
        }
        beta0 = next;
    }

    let unconverged_fits = run.iterations.iter().filter(|i| !i.svm_converged).count();
    if unconverged_fits > 0 {
        warnings.push(ControllerWarning::SvmNotConverged { fits: unconverged_fits });
    }
    let (best, final_model) = run.best.expect("at least one fit ran");
    Ok(ControllerTrace {
        target: *target,
        iterations: run.iterations,
        converged,
        best,
        final_model,
        warnings,
        n_clutter,
    })
}

struct Run<'a> {
    trainer: &'a mut Trainer,
    training: &'a [FeatureVector],
    target: &'a FarTarget,
    solver: &'a TrainConfig,
    n_clutter: usize,
    iterations: Vec<Iteration>,
    best: Option<(usize, SvmModel)>,
    warm: bool,
}

impl Run<'_> {
    fn exhausted(&self) -> bool {
        self.iterations.len() >= self.target.max_iters
    }

    fn step(&mut self, beta0: f64, beta_l: f64, beta_h: f64, phase: Phase) -> Result<f64, FarError> {
        let config = TrainConfig {
            beta0,
            beta1: self.target.beta1,
            ..*self.solver
        };
        let model = self.trainer.fit(&config, self.warm)?;
        self.warm = true;
        let errors = self.count_errors(&model);
        let p_f = errors as f64 / self.n_clutter as f64;
        self.iterations.push(Iteration {
            beta0,
            p_f,
            n_clutter_errors: errors,
            beta_l,
            beta_h,
            phase,
            svm_converged: model.converged(),
        });
        let k = self.iterations.len() - 1;
        let gap = (p_f - self.target.p_f).abs();
        let better = match &self.best {
            None => true,
            Some((b, _)) => gap < (self.iterations[*b].p_f - self.target.p_f).abs(),
        };
        if better {
            self.best = Some((k, model));
        }
        Ok(p_f)
    }

    /// Clutter points with `g > 0`. Margins come from the solver's gradient;
    /// the few within rounding distance of zero are re-evaluated exactly so
    /// the count agrees with [`SvmModel::decide`].
    fn count_errors(&self, model: &SvmModel) -> usize {
        const GUARD: f64 = 1e-8;
        self.training
            .iter()
            .zip(self.trainer.training_margins())
            .filter(|(f, _)| f.label == Label::Clutter)
            .filter(|(f, &g)| {
                let g = if g.abs() <= GUARD {
                    model.decision_value(&f.as_array())
                } else {
                    g
                };
                g > 0.0
            })
            .count()
    }
}
