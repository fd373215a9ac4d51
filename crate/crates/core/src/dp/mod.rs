//! Differential privacy: mechanism, accounting, calibration, verification.

mod accountant;
mod calibrate;
mod mechanism;
mod verify;

pub use accountant::{
    default_orders, epsilon_spent, rdp_subsampled_gaussian, rdp_to_dp, DpConversion, RdpCurve,
};
pub use calibrate::calibrate_sigma;
pub use mechanism::{clip_gradient, dpsgd_train, noisy_batch_gradient};
pub use verify::{randomized_response, verify_dp_enumeration, DiscreteMechanism, VerifyReport};

use crate::error::{Error, Result};

/// Parameters of the clip-and-noise mechanism plus the (ε, δ) target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    /// L2 clipping norm C.
    pub clip_norm: f64,
    /// Noise multiplier σ; noise std is σ·C per coordinate of the sum.
    pub noise_multiplier: f64,
    /// Poisson sampling rate q.
    pub sampling_rate: f64,
    /// Number of mechanism invocations T.
    pub steps: usize,
    pub delta: f64,
    /// Target ε; infinite means the no-noise baseline (σ = 0, no clipping).
    pub target_epsilon: f64,
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_norm > 0.0) {
            return Err(Error::Validation(format!(
                "clip_norm must be > 0, got {}",
                self.clip_norm
            )));
        }
        if !(self.noise_multiplier >= 0.0) {
            return Err(Error::Validation(format!(
                "noise_multiplier must be >= 0, got {}",
                self.noise_multiplier
            )));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(Error::Validation(format!(
                "sampling_rate must be in (0, 1], got {}",
                self.sampling_rate
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Validation(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.target_epsilon > 0.0) {
            return Err(Error::Validation(format!(
                "target_epsilon must be > 0 or infinite, got {}",
                self.target_epsilon
            )));
        }
        if self.target_epsilon.is_infinite() != (self.noise_multiplier == 0.0) {
            return Err(Error::Validation(
                "target_epsilon = inf iff noise_multiplier = 0 (no-noise baseline)".into(),
            ));
        }
        Ok(())
    }

    /// True for the σ = 0 / ε = ∞ baseline where the mechanism is disabled.
    pub fn is_no_noise(&self) -> bool {
        self.target_epsilon.is_infinite()
    }
}

/// Realized (ε, δ) budget spend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacySpent {
    pub epsilon: f64,
    pub delta: f64,
}
