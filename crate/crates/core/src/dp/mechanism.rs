//! Clip-and-noise DP-SGD.

use crate::dp::{epsilon_spent, DpConfig, PrivacySpent};
use crate::error::{Error, Result};
use crate::models::{self, Batch, Gradient, Model};
use crate::rng::Stream;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Scale `g` to L2 norm at most `C`: g·min(1, C/‖g‖₂).
pub fn clip_gradient(g: &Gradient, clip_norm: f64) -> Result<Gradient> {
    if !(clip_norm > 0.0) {
        return Err(Error::Validation(format!(
            "clip_norm must be > 0, got {clip_norm}"
        )));
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    let norm = g.l2_norm();
    if norm <= clip_norm {
        return Ok(g.clone());
    }
    let scale = clip_norm / norm;
    Ok(Gradient {
        values: g.values.iter().map(|v| v * scale).collect(),
    })
}

/// One DP-SGD aggregation: (Σᵢ clip(gᵢ, C) + N(0, σ²C²·I)) / expected_batch.
///
/// `param_len` fixes the output dimension; a Poisson-sampled batch may be
/// empty, in which case the numerator is noise only.
pub fn noisy_batch_gradient(
    per_example: &[Gradient],
    clip_norm: f64,
    noise_multiplier: f64,
    expected_batch: usize,
    param_len: usize,
    rng: &mut Stream,
) -> Result<Gradient> {
    if expected_batch == 0 {
        return Err(Error::Validation("expected_batch must be >= 1".into()));
    }
    if !(noise_multiplier >= 0.0) {
        return Err(Error::Validation("noise_multiplier must be >= 0".into()));
    }
    let mut sum = vec![0.0f64; param_len];
    for g in per_example {
        if g.values.len() != param_len {
            return Err(Error::Validation("gradient length mismatch".into()));
        }
        let clipped = clip_gradient(g, clip_norm)?;
        for (s, v) in sum.iter_mut().zip(&clipped.values) {
            *s += v;
        }
    }
    if noise_multiplier > 0.0 {
        let normal = Normal::new(0.0, noise_multiplier * clip_norm)
            .map_err(|e| Error::Numeric(e.to_string()))?;
        for s in &mut sum {
            *s += normal.sample(rng);
        }
    }
    let scale = expected_batch as f64;
    for s in &mut sum {
        *s /= scale;
    }
    Ok(Gradient { values: sum })
}

/// DP-SGD training loop with Poisson subsampling.
///
/// Runs `epochs·⌈1/q⌉` steps; each step samples every example independently
/// with probability q, clips per-example gradients, noises the sum, and
/// applies a plain SGD step. The returned spend is accounted over the steps
/// actually executed. With ε = ∞ the mechanism is disabled and the loop is
/// exactly plain mini-batch SGD on shuffled data.
pub fn dpsgd_train(
    model: &Model,
    train: &Batch,
    cfg: &DpConfig,
    lr: f64,
    epochs: usize,
    rng: &mut Stream,
) -> Result<(Model, PrivacySpent)> {
    cfg.validate()?;
    let n = train.len();
    if n == 0 {
        return Err(Error::Validation("empty training set".into()));
    }
    let q = cfg.sampling_rate;
    let expected_batch = ((q * n as f64).round() as usize).max(1);

    if cfg.is_no_noise() {
        let trained = models::sgd_train(model, train, lr, epochs, expected_batch, rng)?;
        let spent = PrivacySpent {
            epsilon: f64::INFINITY,
            delta: cfg.delta,
        };
        return Ok((trained, spent));
    }

    let steps_per_epoch = (1.0 / q).ceil() as usize;
    let total_steps = epochs * steps_per_epoch;
    let mut current = model.clone();
    for _ in 0..total_steps {
        let sampled: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < q).collect();
        let per_example = if sampled.is_empty() {
            Vec::new()
        } else {
            models::per_example_grads(&current, &train.select(&sampled))?
        };
        let g = noisy_batch_gradient(
            &per_example,
            cfg.clip_norm,
            cfg.noise_multiplier,
            expected_batch,
            current.params.len(),
            rng,
        )?;
        current = models::sgd_step(&current, &g, lr)?;
    }

    let executed = DpConfig {
        steps: total_steps,
        ..*cfg
    };
    let spent = epsilon_spent(&executed)?;
    Ok((current, spent))
}
