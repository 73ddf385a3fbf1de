//! Radial kernels and a row cache for the SMO solver.

use super::SvmError;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Distance term used inside the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelForm {
    /// `exp(−‖a − b‖ / 2δ²)`: unsquared Euclidean distance.
    #[default]
    Paper,
    /// `exp(−‖a − b‖² / 2δ²)`: the conventional Gaussian kernel.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub delta: f64,
    #[serde(default)]
    pub form: KernelForm,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            delta: 1.0,
            form: KernelForm::Paper,
        }
    }
}

impl KernelConfig {
    pub fn new(delta: f64, form: KernelForm) -> Self {
        KernelConfig { delta, form }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        if self.delta > 0.0 && self.delta.is_finite() {
            Ok(())
        } else {
            Err(SvmError::InvalidParameter(format!(
                "kernel width must be positive, got {}",
                self.delta
            )))
        }
    }

    /// Kernel value without input validation.
    #[inline]
    pub fn eval(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        let d0 = a[0] - b[0];
        let d1 = a[1] - b[1];
        let d2 = a[2] - b[2];
        let sq = d0 * d0 + d1 * d1 + d2 * d2;
        let scale = 2.0 * self.delta * self.delta;
        match self.form {
            KernelForm::Paper => (-sq.sqrt() / scale).exp(),
            KernelForm::Gaussian => (-sq / scale).exp(),
        }
    }
}

/// Radial basis kernel between two feature points.
pub fn rbf_kernel(f1: &[f64; 3], f2: &[f64; 3], config: &KernelConfig) -> Result<f64, SvmError> {
    config.validate()?;
    if f1.iter().chain(f2).any(|v| !v.is_finite()) {
        return Err(SvmError::InvalidParameter("non-finite kernel input".into()));
    }
    Ok(config.eval(f1, f2))
}

/// Least-recently-used cache of full kernel rows `K(i, ·)` over a fixed
/// point set. Rows are shared out as `Arc`s so two rows can be held at once.
#[derive(Debug)]
pub(crate) struct KernelRows {
    points: Vec<[f64; 3]>,
    kernel: KernelConfig,
    slots: Vec<Option<Arc<[f64]>>>,
    last_used: Vec<u64>,
    cached: Vec<usize>,
    capacity: usize,
    clock: u64,
    pub(crate) misses: u64,
}

impl KernelRows {
    pub(crate) fn new(points: Vec<[f64; 3]>, kernel: KernelConfig, budget_bytes: usize) -> Self {
        let n = points.len();
        let row_bytes = n.max(1) * std::mem::size_of::<f64>();
        let capacity = (budget_bytes / row_bytes).clamp(2, n.max(2));
        KernelRows {
            points,
            kernel,
            slots: vec![None; n],
            last_used: vec![0; n],
            cached: Vec::new(),
            capacity,
            clock: 0,
            misses: 0,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.points.len()
    }

    pub(crate) fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub(crate) fn kernel(&self) -> KernelConfig {
        self.kernel
    }

    pub(crate) fn row(&mut self, i: usize) -> Arc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(row) = &self.slots[i] {
            return Arc::clone(row);
        }
        self.misses += 1;
        if self.cached.len() >= self.capacity {
            let (pos, _) = self
                .cached
                .iter()
                .enumerate()
                .min_by_key(|(_, &k)| self.last_used[k])
                .expect("cache is non-empty");
            let evicted = self.cached.swap_remove(pos);
            self.slots[evicted] = None;
        }
        let p = self.points[i];
        let kernel = self.kernel;
        let row: Arc<[f64]> = self.points.iter().map(|q| kernel.eval(&p, q)).collect();
        self.slots[i] = Some(Arc::clone(&row));
        self.cached.push(i);
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_points_give_one() {
        for form in [KernelForm::Paper, KernelForm::Gaussian] {
            let k = KernelConfig::new(0.3, form);
            assert_eq!(rbf_kernel(&[1.0, -2.0, 3.0], &[1.0, -2.0, 3.0], &k).unwrap(), 1.0);
        }
    }

    #[test]
    fn unit_exponent() {
        // ‖F1 − F2‖ = 2δ² with δ = 1.5 → distance 4.5 along one axis.
        let k = KernelConfig::new(1.5, KernelForm::Paper);
        let v = rbf_kernel(&[0.0, 0.0, 0.0], &[4.5, 0.0, 0.0], &k).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_width_and_inputs() {
        let bad = KernelConfig::new(0.0, KernelForm::Paper);
        assert!(rbf_kernel(&[0.0; 3], &[0.0; 3], &bad).is_err());
        let k = KernelConfig::default();
        assert!(rbf_kernel(&[f64::NAN, 0.0, 0.0], &[0.0; 3], &k).is_err());
    }

    #[test]
    fn cache_evicts_least_recently_used() {
        let pts: Vec<[f64; 3]> = (0..4).map(|i| [i as f64, 0.0, 0.0]).collect();
        let mut rows = KernelRows::new(pts, KernelConfig::default(), 2 * 4 * 8);
        rows.row(0);
        rows.row(1);
        rows.row(0);
        rows.row(2); // evicts 1
        assert_eq!(rows.misses, 3);
        rows.row(0);
        assert_eq!(rows.misses, 3);
        rows.row(1);
        assert_eq!(rows.misses, 4);
        let r = rows.row(3);
        assert_eq!(r[3], 1.0);
        assert!((r[1] - (-1.0f64).exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in prop::array::uniform3(-10.0f64..10.0),
            b in prop::array::uniform3(-10.0f64..10.0),
            delta in 0.05f64..5.0,
            gaussian in any::<bool>(),
        ) {
            let form = if gaussian { KernelForm::Gaussian } else { KernelForm::Paper };
            let k = KernelConfig::new(delta, form);
            let ab = rbf_kernel(&a, &b, &k).unwrap();
            prop_assert_eq!(ab, rbf_kernel(&b, &a, &k).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(rbf_kernel(&a, &a, &k).unwrap(), 1.0);
        }
    }
}
