//! Solve for the noise multiplier hitting a target ε.

use crate::dp::{epsilon_spent, DpConfig};
use crate::error::{Error, Result};

const SIGMA_LO: f64 = 1e-2;
const SIGMA_HI: f64 = 1e4;
// Bracket slack on sigma; eps moves roughly twice as fast as sigma near the
// solution, so this keeps the realized eps within 0.1% of the target.
const RELATIVE_SLACK: f64 = 2e-4;

/// Smallest σ (within 0.1% relative slack) whose spend does not exceed
/// `epsilon_target` at the given (δ, q, steps). An infinite target yields
/// σ = 0, the no-noise baseline.
pub fn calibrate_sigma(epsilon_target: f64, delta: f64, q: f64, steps: usize) -> Result<f64> {
    if epsilon_target.is_infinite() {
        return Ok(0.0);
    }
    if !(epsilon_target > 0.0) {
        return Err(Error::Calibration(format!(
            "epsilon_target must be > 0 or infinite, got {epsilon_target}"
        )));
    }
    if steps == 0 {
        return Err(Error::Calibration("steps must be >= 1".into()));
    }
    let spend = |sigma: f64| -> Result<f64> {
        let cfg = DpConfig {
            clip_norm: 1.0,
            noise_multiplier: sigma,
            sampling_rate: q,
            steps,
            delta,
            target_epsilon: epsilon_target,
        };
        Ok(epsilon_spent(&cfg)?.epsilon)
    };

    // epsilon is decreasing in sigma: lo must overshoot, hi must undershoot.
    if spend(SIGMA_LO)? <= epsilon_target {
        return Err(Error::Calibration(format!(
            "target eps={epsilon_target} already met at sigma={SIGMA_LO}; bracket [{SIGMA_LO}, {SIGMA_HI}]"
        )));
    }
    if spend(SIGMA_HI)? > epsilon_target {
        return Err(Error::Calibration(format!(
            "target eps={epsilon_target} unreachable at sigma={SIGMA_HI}; bracket [{SIGMA_LO}, {SIGMA_HI}]"
        )));
    }

    let mut lo = SIGMA_LO;
    let mut hi = SIGMA_HI;
    while (hi - lo) / hi > RELATIVE_SLACK {
        let mid = 0.5 * (lo + hi);
        if spend(mid)? > epsilon_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
