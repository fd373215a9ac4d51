//! Small softmax classifiers with exact per-example gradients.
//!
//! Two architectures: a linear model and a one-hidden-layer MLP with tanh
//! activation. Parameters live in one flat `f64` vector so the DP mechanism
//! and FedAvg can treat every model as a point in R^n.
//!
//! Parameter layout (all row-major):
//! - linear: `W (K x D), b (K)`
//! - mlp:    `W1 (H x D), b1 (H), W2 (K x H), b2 (K)`

use crate::data::LabeledCorpus;
use crate::error::{Error, Result};
use crate::rng::{stream_from_seed, Stream};
use rand::seq::SliceRandom;
use rand::Rng;
use std::io::{Read as _, Write as _};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Mlp,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(ModelKind::Linear),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_dim: usize,
    /// Hidden width; ignored for linear models.
    pub hidden_dim: usize,
    pub num_categories: usize,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.num_categories < 2 {
            return Err(Error::Validation(format!(
                "bad model spec: input_dim={}, num_categories={}",
                self.input_dim, self.num_categories
            )));
        }
        if self.kind == ModelKind::Mlp && self.hidden_dim < 1 {
            return Err(Error::Validation("mlp requires hidden_dim >= 1".into()));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        let (d, h, k) = (self.input_dim, self.hidden_dim, self.num_categories);
        match self.kind {
            ModelKind::Linear => d * k + k,
            ModelKind::Mlp => d * h + h + h * k + k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
}

impl Gradient {
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A featurized mini-batch (or whole corpus).
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Row subset by position.
    pub fn select(&self, rows: &[usize]) -> Batch {
        Batch {
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }
}

/// Clean and hash a text corpus into a featurized batch.
pub fn featurize_corpus(
    corpus: &LabeledCorpus,
    feature_dim: usize,
    ngram_max: usize,
) -> Result<Batch> {
    let mut features = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    for (text, label) in &corpus.examples {
        let cleaned = crate::data::clean_text(text);
        features.push(crate::data::featurize(&cleaned, feature_dim, ngram_max)?.values);
        labels.push(*label);
    }
    Ok(Batch { features, labels })
}

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<Model> {
    spec.validate()?;
    let mut rng = stream_from_seed(seed);
    let mut params = Vec::with_capacity(spec.num_params());
    let layer = |fan_in: usize, fan_out: usize, rng: &mut Stream, params: &mut Vec<f64>| {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            params.push(rng.random_range(-a..a));
        }
        params.extend(std::iter::repeat(0.0).take(fan_out));
    };
    match spec.kind {
        ModelKind::Linear => layer(spec.input_dim, spec.num_categories, &mut rng, &mut params),
        ModelKind::Mlp => {
            layer(spec.input_dim, spec.hidden_dim, &mut rng, &mut params);
            layer(spec.hidden_dim, spec.num_categories, &mut rng, &mut params);
        }
    }
    Ok(Model { spec: *spec, params })
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// Hidden activations and logits for one input.
fn activations(model: &Model, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let spec = &model.spec;
    let (d, k) = (spec.input_dim, spec.num_categories);
    match spec.kind {
        ModelKind::Linear => {
            let logits = (0..k)
                .map(|c| {
                    let row = &model.params[c * d..(c + 1) * d];
                    row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + model.params[d * k + c]
                })
                .collect();
            (Vec::new(), logits)
        }
        ModelKind::Mlp => {
            let h = spec.hidden_dim;
            let (w1, rest) = model.params.split_at(d * h);
            let (b1, rest) = rest.split_at(h);
            let (w2, b2) = rest.split_at(h * k);
            let hidden: Vec<f64> = (0..h)
                .map(|j| {
                    let row = &w1[j * d..(j + 1) * d];
                    (row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b1[j]).tanh()
                })
                .collect();
            let logits = (0..k)
                .map(|c| {
                    let row = &w2[c * h..(c + 1) * h];
                    row.iter().zip(&hidden).map(|(w, hj)| w * hj).sum::<f64>() + b2[c]
                })
                .collect();
            (hidden, logits)
        }
    }
}

/// Softmax class probabilities for one input.
pub fn forward(model: &Model, features: &[f64]) -> Result<Vec<f64>> {
    if features.len() != model.spec.input_dim {
        return Err(Error::Validation(format!(
            "feature length {} != input_dim {}",
            features.len(),
            model.spec.input_dim
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite feature input".into()));
    }
    let (_, logits) = activations(model, features);
    Ok(softmax(&logits))
}

/// Mean cross-entropy over the batch, log-sum-exp stabilized.
pub fn loss(model: &Model, batch: &Batch) -> Result<f64> {
    validate_batch(model, batch)?;
    let mut total = 0.0;
    for (x, &y) in batch.features.iter().zip(&batch.labels) {
        let (_, logits) = activations(model, x);
        total += log_sum_exp(&logits) - logits[y];
    }
    Ok(total / batch.len() as f64)
}

fn validate_batch(model: &Model, batch: &Batch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Validation("empty batch".into()));
    }
    for x in &batch.features {
        if x.len() != model.spec.input_dim {
            return Err(Error::Validation("feature length mismatch".into()));
        }
    }
    for &y in &batch.labels {
        if y >= model.spec.num_categories {
            return Err(Error::Validation(format!("label {y} out of range")));
        }
    }
    Ok(())
}

/// Exact per-example gradients, one per batch row.
pub fn per_example_grads(model: &Model, batch: &Batch) -> Result<Vec<Gradient>> {
    validate_batch(model, batch)?;
    let spec = &model.spec;
    let (d, k) = (spec.input_dim, spec.num_categories);
    let mut grads = Vec::with_capacity(batch.len());
    for (x, &y) in batch.features.iter().zip(&batch.labels) {
        let (hidden, logits) = activations(model, x);
        let probs = softmax(&logits);
        // delta_out[c] = p_c - 1[c = y]
        let mut delta_out = probs;
        delta_out[y] -= 1.0;

        let mut g = vec![0.0; spec.num_params()];
        match spec.kind {
            ModelKind::Linear => {
                for c in 0..k {
                    for (j, &xj) in x.iter().enumerate() {
                        g[c * d + j] = delta_out[c] * xj;
                    }
                    g[d * k + c] = delta_out[c];
                }
            }
            ModelKind::Mlp => {
                let h = spec.hidden_dim;
                let w2_off = d * h + h;
                let b2_off = w2_off + h * k;
                let w2 = &model.params[w2_off..b2_off];
                for c in 0..k {
                    for (j, &hj) in hidden.iter().enumerate() {
                        g[w2_off + c * h + j] = delta_out[c] * hj;
                    }
                    g[b2_off + c] = delta_out[c];
                }
                for j in 0..h {
                    let upstream: f64 = (0..k).map(|c| w2[c * h + j] * delta_out[c]).sum();
                    let delta_hidden = upstream * (1.0 - hidden[j] * hidden[j]);
                    for (i, &xi) in x.iter().enumerate() {
                        g[j * d + i] = delta_hidden * xi;
                    }
                    g[d * h + j] = delta_hidden;
                }
            }
        }
        grads.push(Gradient { values: g });
    }
    Ok(grads)
}

/// Mean of per-example gradients.
pub fn grad(model: &Model, batch: &Batch) -> Result<Gradient> {
    let per_example = per_example_grads(model, batch)?;
    let n = per_example.len() as f64;
    let mut mean = vec![0.0; model.spec.num_params()];
    for g in &per_example {
        for (m, v) in mean.iter_mut().zip(&g.values) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    Ok(Gradient { values: mean })
}

/// One plain gradient step: `params <- params - lr * g`.
pub fn sgd_step(model: &Model, g: &Gradient, lr: f64) -> Result<Model> {
    if lr <= 0.0 {
        return Err(Error::Validation(format!("lr must be > 0, got {lr}")));
    }
    if g.values.len() != model.params.len() {
        return Err(Error::Validation("gradient length mismatch".into()));
    }
    let params: Vec<f64> = model
        .params
        .iter()
        .zip(&g.values)
        .map(|(p, gv)| p - lr * gv)
        .collect();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numeric("non-finite parameters after sgd step".into()));
    }
    Ok(Model {
        spec: model.spec,
        params,
    })
}

/// Plain mini-batch SGD over shuffled epochs. This is the exact trace the
/// DP path reduces to when the privacy mechanism is disabled.
pub fn sgd_train(
    model: &Model,
    data: &Batch,
    lr: f64,
    epochs: usize,
    batch_size: usize,
    rng: &mut Stream,
) -> Result<Model> {
    if batch_size == 0 {
        return Err(Error::Validation("batch_size must be >= 1".into()));
    }
    let mut current = model.clone();
    let n = data.len();
    for _ in 0..epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for chunk in order.chunks(batch_size) {
            let mini = data.select(chunk);
            let g = grad(&current, &mini)?;
            current = sgd_step(&current, &g, lr)?;
        }
    }
    Ok(current)
}

/// Fraction of argmax predictions matching labels; ties break toward the
/// lowest category index.
pub fn evaluate(model: &Model, test: &Batch) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Validation("empty test set".into()));
    }
    validate_batch(model, test)?;
    let mut correct = 0usize;
    for (x, &y) in test.features.iter().zip(&test.labels) {
        let (_, logits) = activations(model, x);
        let mut best = 0usize;
        for (c, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = c;
            }
        }
        if best == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"DPFLMDL1";

/// Write the checkpoint format: 8-byte magic, kind byte (0 linear, 1 mlp),
/// three u32 LE dims, then the flat parameter vector as f64 LE.
pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(21 + model.params.len() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.push(match model.spec.kind {
        ModelKind::Linear => 0,
        ModelKind::Mlp => 1,
    });
    for dim in [
        model.spec.input_dim,
        model.spec.hidden_dim,
        model.spec.num_categories,
    ] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for p in &model.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 21 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::Validation(format!("{path:?} is not a checkpoint")));
    }
    let kind = match bytes[8] {
        0 => ModelKind::Linear,
        1 => ModelKind::Mlp,
        other => return Err(Error::Validation(format!("unknown model kind {other}"))),
    };
    let dim_at = |i: usize| {
        u32::from_le_bytes(bytes[9 + 4 * i..13 + 4 * i].try_into().unwrap()) as usize
    };
    let spec = ModelSpec {
        kind,
        input_dim: dim_at(0),
        hidden_dim: dim_at(1),
        num_categories: dim_at(2),
    };
    spec.validate()?;
    let body = &bytes[21..];
    if body.len() != spec.num_params() * 8 {
        return Err(Error::Validation(format!(
            "checkpoint holds {} bytes of parameters, expected {}",
            body.len(),
            spec.num_params() * 8
        )));
    }
    let params: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numeric("checkpoint contains non-finite values".into()));
    }
    Ok(Model { spec, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn linear_spec(d: usize, k: usize) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::Linear,
            input_dim: d,
            hidden_dim: 0,
            num_categories: k,
        }
    }

    pub(crate) fn mlp_spec(d: usize, h: usize, k: usize) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::Mlp,
            input_dim: d,
            hidden_dim: h,
            num_categories: k,
        }
    }

    fn random_batch(spec: &ModelSpec, n: usize, seed: u64) -> Batch {
        let mut rng = stream_from_seed(seed);
        Batch {
            features: (0..n)
                .map(|_| (0..spec.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            labels: (0..n)
                .map(|_| rng.random_range(0..spec.num_categories))
                .collect(),
        }
    }

    #[test]
    fn param_counts() {
        assert_eq!(init_model(&linear_spec(4, 2), 0).unwrap().params.len(), 10);
        assert_eq!(init_model(&mlp_spec(4, 3, 2), 0).unwrap().params.len(), 23);
    }

    #[test]
    fn init_deterministic_and_bounded() {
        let a = init_model(&mlp_spec(6, 4, 3), 5).unwrap();
        let b = init_model(&mlp_spec(6, 4, 3), 5).unwrap();
        assert_eq!(a, b);
        // Loosest of the two layer bounds: sqrt(6/(4+3)) for the 4x3 layer.
        let bound = (6.0f64 / (4.0 + 3.0)).sqrt();
        assert!(a.params.iter().all(|p| p.abs() <= bound));
    }

    #[test]
    fn zero_params_give_uniform_softmax() {
        let spec = linear_spec(3, 4);
        let model = Model {
            spec,
            params: vec![0.0; spec.num_params()],
        };
        let p = forward(&model, &[0.3, -0.2, 0.9]).unwrap();
        for v in p {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_normalizes_and_shift_invariant() {
        let spec = linear_spec(5, 3);
        let model = init_model(&spec, 7).unwrap();
        let mut rng = stream_from_seed(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = forward(&model, &x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
        }
        // Shifting all logits by a constant (bias shift) leaves probs alone.
        let mut shifted = model.clone();
        for c in 0..3 {
            shifted.params[5 * 3 + c] += 10.0;
        }
        let x = [0.1, 0.2, 0.3, 0.4, 0.5];
        let p0 = forward(&model, &x).unwrap();
        let p1 = forward(&shifted, &x).unwrap();
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_at_zero_params_is_ln_k() {
        let spec = linear_spec(4, 2);
        let model = Model {
            spec,
            params: vec![0.0; spec.num_params()],
        };
        let batch = random_batch(&spec, 20, 3);
        assert!((loss(&model, &batch).unwrap() - 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_model_drives_loss_to_zero() {
        let spec = linear_spec(2, 2);
        // Huge weights aligned with the labels.
        let model = Model {
            spec,
            params: vec![50.0, 0.0, 0.0, 50.0, 0.0, 0.0],
        };
        let batch = Batch {
            features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            labels: vec![0, 1],
        };
        assert!(loss(&model, &batch).unwrap() < 1e-9);
    }

    #[test]
    fn loss_is_mean_of_per_example_losses() {
        let spec = mlp_spec(4, 3, 3);
        let model = init_model(&spec, 11).unwrap();
        let batch = random_batch(&spec, 17, 13);
        let mut manual = 0.0;
        for i in 0..batch.len() {
            manual += loss(&model, &batch.select(&[i])).unwrap();
        }
        manual /= batch.len() as f64;
        assert!((loss(&model, &batch).unwrap() - manual).abs() < 1e-12);
    }

    #[test]
    fn grad_equals_mean_of_per_example() {
        for spec in [linear_spec(5, 3), mlp_spec(5, 4, 3)] {
            for seed in 0..50 {
                let model = init_model(&spec, seed).unwrap();
                let batch = random_batch(&spec, 9, seed + 1000);
                let per = per_example_grads(&model, &batch).unwrap();
                let mean = grad(&model, &batch).unwrap();
                for j in 0..mean.values.len() {
                    let avg: f64 =
                        per.iter().map(|g| g.values[j]).sum::<f64>() / per.len() as f64;
                    assert!((mean.values[j] - avg).abs() < 1e-10);
                }
            }
        }
    }

    /// Central finite differences on the batch loss; the independent oracle
    /// for analytic gradients.
    pub(crate) fn finite_difference_grad(model: &Model, batch: &Batch, h: f64) -> Vec<f64> {
        (0..model.params.len())
            .map(|j| {
                let mut plus = model.clone();
                plus.params[j] += h;
                let mut minus = model.clone();
                minus.params[j] -= h;
                (loss(&plus, batch).unwrap() - loss(&minus, batch).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    pub(crate) fn max_relative_fd_error(model: &Model, batch: &Batch) -> f64 {
        let analytic = grad(model, batch).unwrap();
        let numeric = finite_difference_grad(model, batch, 1e-5);
        analytic
            .values
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3))
            .fold(0.0, f64::max)
    }

    #[test]
    fn gradients_match_finite_differences() {
        for spec in [linear_spec(4, 3), mlp_spec(4, 3, 3)] {
            for seed in 0..10 {
                let model = init_model(&spec, seed).unwrap();
                let batch = random_batch(&spec, 6, seed + 77);
                assert!(max_relative_fd_error(&model, &batch) < 1e-5);
            }
        }
    }

    #[test]
    fn linear_per_example_gradient_structure() {
        let spec = linear_spec(4, 3);
        let model = init_model(&spec, 2).unwrap();
        let batch = random_batch(&spec, 5, 8);
        let grads = per_example_grads(&model, &batch).unwrap();
        for (i, g) in grads.iter().enumerate() {
            let x = &batch.features[i];
            let y = batch.labels[i];
            let mut p = forward(&model, x).unwrap();
            p[y] -= 1.0;
            // Logit block is outer(x, p - onehot(y)).
            for c in 0..3 {
                for j in 0..4 {
                    assert!((g.values[c * 4 + j] - p[c] * x[j]).abs() < 1e-12);
                }
            }
            // Per feature, entries across categories sum to zero.
            for j in 0..4 {
                let s: f64 = (0..3).map(|c| g.values[c * 4 + j]).sum();
                assert!(s.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grad_vanishes_at_symmetric_stationary_point() {
        // One feature vector under both labels at zero params: the softmax
        // deltas are [-1/2, 1/2] and [1/2, -1/2], so weight and bias
        // contributions cancel exactly.
        let spec = linear_spec(2, 2);
        let model = Model {
            spec,
            params: vec![0.0; spec.num_params()],
        };
        let batch = Batch {
            features: vec![vec![1.0, -0.5], vec![1.0, -0.5]],
            labels: vec![0, 1],
        };
        let g = grad(&model, &batch).unwrap();
        for v in g.values {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn sgd_step_basics() {
        let spec = linear_spec(2, 2);
        let model = init_model(&spec, 0).unwrap();
        let zero = Gradient {
            values: vec![0.0; spec.num_params()],
        };
        assert_eq!(sgd_step(&model, &zero, 0.1).unwrap().params, model.params);

        let g = Gradient {
            values: vec![1.0; spec.num_params()],
        };
        let two_small = sgd_step(&sgd_step(&model, &g, 0.1).unwrap(), &g, 0.1).unwrap();
        let one_big = sgd_step(&model, &g, 0.2).unwrap();
        for (a, b) in two_small.params.iter().zip(&one_big.params) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sgd_step_decreases_convex_loss() {
        let spec = linear_spec(1, 2);
        let model = init_model(&spec, 1).unwrap();
        let batch = Batch {
            features: vec![vec![1.0]],
            labels: vec![0],
        };
        let before = loss(&model, &batch).unwrap();
        let g = grad(&model, &batch).unwrap();
        let after = loss(&sgd_step(&model, &g, 0.1).unwrap(), &batch).unwrap();
        assert!(after < before);
    }

    #[test]
    fn evaluate_tie_break_and_self_consistency() {
        let spec = linear_spec(3, 2);
        let zero = Model {
            spec,
            params: vec![0.0; spec.num_params()],
        };
        let batch = random_batch(&spec, 40, 4);
        // All logits tie, so every prediction is category 0.
        let freq0 =
            batch.labels.iter().filter(|&&y| y == 0).count() as f64 / batch.len() as f64;
        assert_eq!(evaluate(&zero, &batch).unwrap(), freq0);

        // Labels replaced by the model's own predictions -> accuracy 1.
        let model = init_model(&spec, 9).unwrap();
        let predicted: Vec<usize> = batch
            .features
            .iter()
            .map(|x| {
                let p = forward(&model, x).unwrap();
                (0..p.len()).fold(0, |best, c| if p[c] > p[best] { c } else { best })
            })
            .collect();
        let relabeled = Batch {
            features: batch.features.clone(),
            labels: predicted,
        };
        assert_eq!(evaluate(&model, &relabeled).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_invariant_under_logit_rescale() {
        let spec = linear_spec(4, 3);
        let model = init_model(&spec, 3).unwrap();
        let batch = random_batch(&spec, 30, 6);
        let mut scaled = model.clone();
        for p in &mut scaled.params {
            *p *= 7.5;
        }
        assert_eq!(
            evaluate(&model, &batch).unwrap(),
            evaluate(&scaled, &batch).unwrap()
        );
    }

    #[test]
    fn checkpoint_round_trip() {
        let spec = mlp_spec(5, 3, 2);
        let model = init_model(&spec, 42).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        save_checkpoint(&model, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), model);
    }

    #[test]
    fn training_sanity_on_separable_data() {
        let corpus = crate::data::synth_corpus(400, 2, 32, 5.0, 21).unwrap();
        let data = featurize_corpus(&corpus, 32, 1).unwrap();
        let spec = linear_spec(32, 2);
        let model = init_model(&spec, 1).unwrap();
        let mut rng = stream_from_seed(2);
        let trained = sgd_train(&model, &data, 0.5, 200, data.len(), &mut rng).unwrap();
        assert!(evaluate(&trained, &data).unwrap() >= 0.95);
    }
}
