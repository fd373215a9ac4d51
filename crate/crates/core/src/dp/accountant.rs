//! Rényi-DP accounting for the subsampled Gaussian mechanism.

use crate::dp::{DpConfig, PrivacySpent};
use crate::error::{Error, Result};

/// Rényi divergence bounds at a set of orders.
#[derive(Debug, Clone, PartialEq)]
pub struct RdpCurve {
    pub orders: Vec<f64>,
    pub values: Vec<f64>,
}

impl RdpCurve {
    pub fn new(orders: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if orders.len() != values.len() || orders.is_empty() {
            return Err(Error::Accounting("curve orders/values mismatch".into()));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Accounting("orders must be strictly increasing".into()));
        }
        if orders.iter().any(|&a| a <= 1.0) {
            return Err(Error::Accounting("orders must exceed 1".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Accounting("values must be finite and >= 0".into()));
        }
        Ok(Self { orders, values })
    }
}

/// The order grid used when callers do not supply one.
pub fn default_orders() -> Vec<f64> {
    let mut orders = vec![1.25, 1.5, 1.75];
    orders.extend((2..=64).map(f64::from));
    orders.push(128.0);
    orders.push(256.0);
    orders
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Per-step RDP of the subsampled Gaussian at integer order α ≥ 2,
/// binomial-sum form:
///
/// ε(α) = ln( Σ_{k=0}^{α} C(α,k) (1−q)^{α−k} q^k exp(k(k−1)/(2σ²)) ) / (α−1)
fn rdp_one_step_integer(sigma: f64, q: f64, alpha: u64) -> f64 {
    let mut terms = Vec::with_capacity(alpha as usize + 1);
    let mut log_binom = 0.0f64; // ln C(alpha, 0)
    for k in 0..=alpha {
        if k > 0 {
            log_binom += ((alpha - k + 1) as f64).ln() - (k as f64).ln();
        }
        let kf = k as f64;
        let term = log_binom
            + (alpha - k) as f64 * (1.0 - q).ln()
            + kf * q.ln()
            + kf * (kf - 1.0) / (2.0 * sigma * sigma);
        terms.push(term);
    }
    log_sum_exp(&terms) / (alpha as f64 - 1.0)
}

/// RDP curve for T steps of the subsampled Gaussian mechanism.
///
/// For q = 1 the value at order α is exactly T·α/(2σ²) at every order. For
/// q < 1 the integer-α binomial bound is used and non-integer or
/// non-computable orders are dropped from the curve.
pub fn rdp_subsampled_gaussian(
    sigma: f64,
    q: f64,
    steps: usize,
    orders: &[f64],
) -> Result<RdpCurve> {
    if !(sigma > 0.0) {
        return Err(Error::Accounting(format!("sigma must be > 0, got {sigma}")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Accounting(format!("q must be in (0, 1], got {q}")));
    }
    let mut kept_orders = Vec::new();
    let mut values = Vec::new();
    for &alpha in orders {
        if alpha <= 1.0 {
            continue;
        }
        let per_step = if q == 1.0 {
            alpha / (2.0 * sigma * sigma)
        } else if alpha.fract() == 0.0 {
            rdp_one_step_integer(sigma, q, alpha as u64)
        } else {
            continue;
        };
        let total = per_step * steps as f64;
        if total.is_finite() && total >= 0.0 {
            kept_orders.push(alpha);
            values.push(total);
        }
    }
    if kept_orders.is_empty() {
        return Err(Error::Accounting("no usable RDP orders".into()));
    }
    RdpCurve::new(kept_orders, values)
}

/// An (ε, δ) conversion together with the minimizing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConversion {
    pub spent: PrivacySpent,
    pub best_order: f64,
}

/// Convert an RDP curve to (ε, δ): ε = min_α [ value(α) + ln(1/δ)/(α−1) ].
pub fn rdp_to_dp(curve: &RdpCurve, delta: f64) -> Result<DpConversion> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Accounting(format!("delta must be in (0, 1), got {delta}")));
    }
    let log_inv_delta = (1.0 / delta).ln();
    let mut best = f64::INFINITY;
    let mut best_order = curve.orders[0];
    for (&alpha, &value) in curve.orders.iter().zip(&curve.values) {
        let eps = value + log_inv_delta / (alpha - 1.0);
        if eps < best {
            best = eps;
            best_order = alpha;
        }
    }
    Ok(DpConversion {
        spent: PrivacySpent {
            epsilon: best,
            delta,
        },
        best_order,
    })
}

/// Total (ε, δ) spend of a configuration over its T steps.
pub fn epsilon_spent(cfg: &DpConfig) -> Result<PrivacySpent> {
    if cfg.steps == 0 {
        return Ok(PrivacySpent {
            epsilon: 0.0,
            delta: cfg.delta,
        });
    }
    if cfg.noise_multiplier == 0.0 {
        return Ok(PrivacySpent {
            epsilon: f64::INFINITY,
            delta: cfg.delta,
        });
    }
    let curve = rdp_subsampled_gaussian(
        cfg.noise_multiplier,
        cfg.sampling_rate,
        cfg.steps,
        &default_orders(),
    )?;
    Ok(rdp_to_dp(&curve, cfg.delta)?.spent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn full_batch_anchor_is_exact() {
        let curve = rdp_subsampled_gaussian(1.0, 1.0, 1, &[2.0]).unwrap();
        assert_eq!(curve.values[0], 1.0);

        let curve = rdp_subsampled_gaussian(2.0, 1.0, 10, &[4.0]).unwrap();
        assert_eq!(curve.values[0], 5.0);
    }

    #[test]
    fn full_batch_anchor_random_triples() {
        let mut rng = crate::rng::stream_from_seed(17);
        for _ in 0..20 {
            let steps = rng.random_range(1..10_000usize);
            let alpha = rng.random_range(1.01..300.0f64);
            let sigma = rng.random_range(0.3..30.0f64);
            let curve = rdp_subsampled_gaussian(sigma, 1.0, steps, &[alpha]).unwrap();
            let expected = steps as f64 * alpha / (2.0 * sigma * sigma);
            let rel = (curve.values[0] - expected).abs() / expected;
            assert!(rel <= 1e-12, "rel={rel}");
        }
    }

    #[test]
    fn subsampled_drops_fractional_orders() {
        let curve = rdp_subsampled_gaussian(1.0, 0.1, 5, &default_orders()).unwrap();
        assert!(curve.orders.iter().all(|a| a.fract() == 0.0));
        assert!(curve.orders.contains(&2.0));
    }

    #[test]
    fn additivity_in_steps() {
        let orders = default_orders();
        let one = rdp_subsampled_gaussian(1.2, 0.05, 1, &orders).unwrap();
        let many = rdp_subsampled_gaussian(1.2, 0.05, 37, &orders).unwrap();
        assert_eq!(one.orders, many.orders);
        for (a, b) in one.values.iter().zip(&many.values) {
            assert!((b - 37.0 * a).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn conversion_single_order() {
        let curve = RdpCurve::new(vec![2.0], vec![1.0]).unwrap();
        let conv = rdp_to_dp(&curve, (-1.0f64).exp()).unwrap();
        assert!((conv.spent.epsilon - 2.0).abs() < 1e-12);
        assert_eq!(conv.best_order, 2.0);
    }

    #[test]
    fn smaller_delta_means_larger_epsilon() {
        let curve = rdp_subsampled_gaussian(1.0, 0.02, 500, &default_orders()).unwrap();
        let loose = rdp_to_dp(&curve, 1e-3).unwrap().spent.epsilon;
        let tight = rdp_to_dp(&curve, 1e-7).unwrap().spent.epsilon;
        assert!(tight > loose);
    }

    #[test]
    fn dense_vs_coarse_grid_agree() {
        let coarse: Vec<f64> = (2..=64).map(f64::from).collect();
        let dense: Vec<f64> = (2..=256).map(f64::from).collect();
        let c1 = rdp_subsampled_gaussian(1.5, 0.01, 2000, &coarse).unwrap();
        let c2 = rdp_subsampled_gaussian(1.5, 0.01, 2000, &dense).unwrap();
        let e1 = rdp_to_dp(&c1, 1e-5).unwrap().spent.epsilon;
        let e2 = rdp_to_dp(&c2, 1e-5).unwrap().spent.epsilon;
        assert!((e1 - e2).abs() / e2 < 0.02);
    }

    #[test]
    fn spend_edge_cases() {
        let mut cfg = DpConfig {
            clip_norm: 1.0,
            noise_multiplier: 1.0,
            sampling_rate: 0.1,
            steps: 0,
            delta: 1e-5,
            target_epsilon: 5.0,
        };
        assert_eq!(epsilon_spent(&cfg).unwrap().epsilon, 0.0);
        cfg.steps = 10;
        cfg.noise_multiplier = 0.0;
        assert!(epsilon_spent(&cfg).unwrap().epsilon.is_infinite());
    }

    #[test]
    fn epsilon_monotone_in_sigma_steps_and_q() {
        let eps = |sigma: f64, q: f64, steps: usize| {
            let cfg = DpConfig {
                clip_norm: 1.0,
                noise_multiplier: sigma,
                sampling_rate: q,
                steps,
                delta: 1e-5,
                target_epsilon: 5.0,
            };
            epsilon_spent(&cfg).unwrap().epsilon
        };
        // Non-increasing in sigma.
        let sigmas = [0.6, 0.8, 1.0, 1.5, 2.0, 4.0, 8.0];
        for w in sigmas.windows(2) {
            assert!(eps(w[1], 0.05, 200) < eps(w[0], 0.05, 200));
        }
        // Non-decreasing in steps and q.
        assert!(eps(1.0, 0.05, 400) > eps(1.0, 0.05, 200));
        assert!(eps(1.0, 0.1, 200) > eps(1.0, 0.05, 200));
    }
}
