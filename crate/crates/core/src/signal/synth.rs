//! Synthetic stand-in for an IPIX recording.
//!
//! Clutter is compound Gaussian: complex Gaussian speckle modulated by a
//! Gamma-distributed texture, so the envelope is K-distributed. The texture
//! is a beta-gamma autoregression, which keeps the Gamma(ν) marginal exact
//! while giving an exponential autocorrelation `ρ^k`. The target is a
//! Rayleigh-fluctuating return (a slow complex Gaussian AR(1) process) whose
//! phase additionally performs a random walk around a Doppler offset.
//!
//! Every clutter cell is scaled to unit mean power over its realization and
//! the target to `10^(scr_db/10)` mean power, so the requested SCR holds for
//! the realized data rather than only in expectation.

use super::{CellRole, ComplexSeries, Dataset, Origin, Polarization, SignalError};
use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Stream offset separating target draws from per-cell clutter draws.
const TARGET_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    /// Target-to-clutter power ratio of the primary cell, in dB.
    /// `f64::NEG_INFINITY` produces a primary cell with no target at all.
    pub scr_db: f64,
    pub n_cells: usize,
    pub n_samples: usize,
    /// Shape ν of the Gamma texture; small ν gives spiky clutter.
    pub clutter_shape: f64,
    pub sample_rate_hz: f64,
    pub texture_corr_ms: f64,
    pub speckle_corr_ms: f64,
    pub target_corr_ms: f64,
    pub target_doppler_hz: f64,
    /// Per-sample standard deviation of the target phase random walk (rad).
    pub target_phase_step: f64,
    /// Target power in the secondary cells relative to the primary cell (dB).
    pub secondary_leak_db: f64,
    pub polarization: Polarization,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            scr_db: 10.0,
            n_cells: 14,
            n_samples: super::IPIX_CELL_LEN,
            clutter_shape: 1.0,
            sample_rate_hz: super::IPIX_SAMPLE_RATE_HZ,
            texture_corr_ms: 100.0,
            speckle_corr_ms: 5.0,
            target_corr_ms: 500.0,
            target_doppler_hz: 20.0,
            target_phase_step: 0.05,
            secondary_leak_db: -6.0,
            polarization: Polarization::HH,
        }
    }
}

impl SynthConfig {
    /// Index of the target cell: the middle of the range swath.
    pub fn primary_index(&self) -> usize {
        self.n_cells / 2
    }

    /// Neighbours of the primary cell are marked secondary whenever at least
    /// two clutter-only cells remain.
    pub fn role_of(&self, k: usize) -> CellRole {
        let p = self.primary_index();
        if k == p {
            CellRole::Primary
        } else if self.n_cells >= 5 && (k + 1 == p || k == p + 1) {
            CellRole::Secondary
        } else {
            CellRole::ClutterOnly
        }
    }

    fn validate(&self) -> Result<f64, SignalError> {
        if self.n_cells < 2 {
            return Err(SignalError::InvalidParameter(format!(
                "n_cells must be >= 2, got {}",
                self.n_cells
            )));
        }
        if self.n_samples < 1 << 12 {
            return Err(SignalError::InvalidParameter(format!(
                "n_samples must be >= 4096, got {}",
                self.n_samples
            )));
        }
        if !(self.clutter_shape > 0.0 && self.clutter_shape.is_finite()) {
            return Err(SignalError::InvalidParameter(format!(
                "clutter_shape must be positive, got {}",
                self.clutter_shape
            )));
        }
        for (name, v) in [
            ("sample_rate_hz", self.sample_rate_hz),
            ("texture_corr_ms", self.texture_corr_ms),
            ("speckle_corr_ms", self.speckle_corr_ms),
            ("target_corr_ms", self.target_corr_ms),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SignalError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.target_phase_step.is_finite() || !self.target_doppler_hz.is_finite() {
            return Err(SignalError::InvalidParameter("target phase parameters must be finite".into()));
        }
        if self.scr_db.is_nan() {
            return Err(SignalError::InvalidParameter("scr_db is NaN".into()));
        }
        let power = 10f64.powf(self.scr_db / 10.0);
        if !power.is_finite() || self.secondary_leak_db.is_nan() {
            return Err(SignalError::InvalidParameter(format!(
                "scr_db = {} gives a non-finite target scale",
                self.scr_db
            )));
        }
        Ok(power)
    }

    fn corr_coefficient(&self, ms: f64) -> f64 {
        (-1000.0 / (ms * self.sample_rate_hz)).exp()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Unit-power compound-Gaussian clutter for cell `k`.
    fn clutter(&self, k: usize) -> Vec<Complex64> {
        let mut rng = self.rng(k as u64);
        let nu = self.clutter_shape;
        let rho_tex = self.corr_coefficient(self.texture_corr_ms);
        let rho_sp = self.corr_coefficient(self.speckle_corr_ms);
        let innov_sp = (1.0 - rho_sp * rho_sp).sqrt();

        // Beta-gamma AR(1): T' = B·T + G keeps T ~ Gamma(ν, 1/ν).
        let start = Gamma::new(nu, 1.0 / nu).expect("validated shape");
        let carry = Beta::new(rho_tex * nu, (1.0 - rho_tex) * nu).expect("valid beta");
        let fresh = Gamma::new((1.0 - rho_tex) * nu, 1.0 / nu).expect("valid gamma");

        let mut texture = start.sample(&mut rng);
        let mut speckle = complex_normal(&mut rng);
        let mut out = Vec::with_capacity(self.n_samples);
        for _ in 0..self.n_samples {
            out.push(speckle * texture.sqrt());
            texture = carry.sample(&mut rng) * texture + fresh.sample(&mut rng);
            speckle = speckle * rho_sp + complex_normal(&mut rng) * innov_sp;
        }
        scale_to_power(&mut out, 1.0);
        out
    }

    /// Target return with realized mean power `power`.
    fn target(&self, power: f64) -> Vec<Complex64> {
        let mut rng = self.rng(TARGET_STREAM);
        let rho = self.corr_coefficient(self.target_corr_ms);
        let innov = (1.0 - rho * rho).sqrt();
        let omega = 2.0 * PI * self.target_doppler_hz / self.sample_rate_hz;

        let mut fading = complex_normal(&mut rng);
        let mut phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let mut out = Vec::with_capacity(self.n_samples);
        for _ in 0..self.n_samples {
            out.push(fading * Complex64::from_polar(1.0, phase));
            fading = fading * rho + complex_normal(&mut rng) * innov;
            let step: f64 = rng.sample(StandardNormal);
            phase = (phase + omega + self.target_phase_step * step).rem_euclid(2.0 * PI);
        }
        scale_to_power(&mut out, power);
        out
    }

    pub fn generate(&self) -> Result<Dataset, SignalError> {
        let target_power = self.validate()?;
        let target = (target_power > 0.0).then(|| self.target(target_power));
        let leak = 10f64.powf(self.secondary_leak_db / 20.0);

        let cells = (0..self.n_cells)
            .map(|k| {
                let role = self.role_of(k);
                let mut x = self.clutter(k);
                if let Some(t) = &target {
                    let gain = match role {
                        CellRole::Primary => 1.0,
                        CellRole::Secondary => leak,
                        CellRole::ClutterOnly => 0.0,
                    };
                    if gain > 0.0 {
                        x.iter_mut().zip(t).for_each(|(c, s)| *c += s * gain);
                    }
                }
                ComplexSeries {
                    samples: x
                        .iter()
                        .map(|c| Complex32::new(c.re as f32, c.im as f32))
                        .collect(),
                    sample_rate_hz: self.sample_rate_hz,
                    cell_index: k,
                    cell_role: role,
                }
            })
            .collect();

        Ok(Dataset {
            cells,
            polarization: self.polarization,
            name: format!("synthetic-s{}-scr{}", self.seed, self.scr_db),
            origin: Origin::Synthetic {
                seed: self.seed,
                scr_db: self.scr_db,
            },
        })
    }
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

fn scale_to_power(x: &mut [Complex64], power: f64) {
    let current = x.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
    if current > 0.0 {
        let g = (power / current).sqrt();
        x.iter_mut().for_each(|c| *c *= g);
    }
}

/// Synthetic dataset with default clutter correlation times and target
/// dynamics; see [`SynthConfig`] for the full parameter set.
pub fn synthesize_dataset(
    seed: u64,
    scr_db: f64,
    n_cells: usize,
    n_samples: usize,
    clutter_shape: f64,
) -> Result<Dataset, SignalError> {
    SynthConfig {
        seed,
        scr_db,
        n_cells,
        n_samples,
        clutter_shape,
        ..SynthConfig::default()
    }
    .generate()
}
