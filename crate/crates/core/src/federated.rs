//! Simulated federated learning: client sampling, local training, FedAvg.

use crate::data::ClientShard;
use crate::dp::{epsilon_spent, DpConfig, PrivacySpent};
use crate::error::{Error, Result};
use crate::models::{self, Batch, Model};
use crate::rng::{selection_stream, Stream};
use rand::seq::index::sample;

#[derive(Debug, Clone)]
pub struct FlConfig {
    pub num_clients: usize,
    /// Fraction of clients selected each round.
    pub fraction: f64,
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// When present, every client trains with local DP-SGD; q and steps are
    /// derived per client from its shard size.
    pub dp: Option<DpConfig>,
}

impl FlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::Validation("num_clients must be >= 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "fraction must be in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.rounds == 0 || self.local_epochs == 0 || self.batch_size == 0 {
            return Err(Error::Validation(
                "rounds, local_epochs, and batch_size must be >= 1".into(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Validation(format!("lr must be > 0, got {}", self.lr)));
        }
        Ok(())
    }

    pub fn clients_per_round(&self) -> usize {
        ((self.fraction * self.num_clients as f64).ceil() as usize).max(1)
    }

    /// Per-client DP configuration for a shard of `shard_size` examples.
    pub fn client_dp(&self, shard_size: usize) -> Option<DpConfig> {
        self.dp.map(|dp| DpConfig {
            sampling_rate: (self.batch_size as f64 / shard_size as f64).min(1.0),
            ..dp
        })
    }
}

/// One client in a round: identity, data slice, derived stream seed.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub client_id: usize,
    pub shard: ClientShard,
    pub seed: u64,
}

/// A client's post-training parameters plus its example count.
#[derive(Debug, Clone)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub params: Vec<f64>,
    pub num_examples: usize,
    pub privacy: Option<PrivacySpent>,
}

/// History entry for one federated round.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub round: usize,
    pub selected: Vec<usize>,
    pub accuracy: f64,
    /// Cumulative per-client spend after this round, DP runs only.
    pub privacy: Vec<(usize, PrivacySpent)>,
}

/// Uniform sample without replacement of ⌈fraction·N⌉ client ids, sorted.
pub fn select_clients(num_clients: usize, fraction: f64, rng: &mut Stream) -> Result<Vec<usize>> {
    if num_clients == 0 || !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "bad selection inputs: N={num_clients}, fraction={fraction}"
        )));
    }
    let count = ((fraction * num_clients as f64).ceil() as usize).max(1);
    let mut ids: Vec<usize> = sample(rng, num_clients, count).into_iter().collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Train a copy of the global model on one client's shard.
///
/// `data` must hold the featurized rows of `state.shard` in shard order.
pub fn local_update(
    global: &Model,
    state: &ClientState,
    data: &Batch,
    cfg: &FlConfig,
) -> Result<ClientUpdate> {
    cfg.validate()?;
    if state.shard.indices.is_empty() {
        return Err(Error::Validation("empty client shard".into()));
    }
    if data.len() != state.shard.indices.len() {
        return Err(Error::Validation("client data does not match shard".into()));
    }
    let mut rng = crate::rng::stream_from_seed(state.seed);
    let n = data.len();

    let (model, privacy) = match cfg.client_dp(n) {
        Some(dp) => {
            let (m, spent) = crate::dp::dpsgd_train(global, data, &dp, cfg.lr, cfg.local_epochs, &mut rng)?;
            (m, Some(spent))
        }
        None => {
            let m = models::sgd_train(global, data, cfg.lr, cfg.local_epochs, cfg.batch_size.min(n), &mut rng)?;
            (m, None)
        }
    };
    Ok(ClientUpdate {
        client_id: state.client_id,
        params: model.params,
        num_examples: n,
        privacy,
    })
}

/// Example-count-weighted coordinate-wise mean of client parameters.
pub fn fedavg(updates: &[ClientUpdate]) -> Result<Vec<f64>> {
    let first = updates
        .first()
        .ok_or_else(|| Error::Aggregation("no updates to aggregate".into()))?;
    let len = first.params.len();
    if updates.iter().any(|u| u.params.len() != len) {
        return Err(Error::Aggregation("parameter length mismatch".into()));
    }
    let total: f64 = updates.iter().map(|u| u.num_examples as f64).sum();
    let mut out = vec![0.0f64; len];
    for update in updates {
        let weight = update.num_examples as f64 / total;
        for (o, p) in out.iter_mut().zip(&update.params) {
            *o += weight * p;
        }
    }
    Ok(out)
}

/// The full round loop: select → local updates → FedAvg → evaluate.
///
/// Pure in (inputs, master_seed): every client's stream is derived from
/// `(master_seed, client_id, round)` and updates are aggregated in ascending
/// client-id order, so the result does not depend on execution schedule.
pub fn run_federated(
    initial: &Model,
    shards: &[ClientShard],
    train: &Batch,
    test: &Batch,
    cfg: &FlConfig,
    master_seed: u64,
) -> Result<(Model, Vec<RoundRecord>)> {
    cfg.validate()?;
    if shards.len() != cfg.num_clients {
        return Err(Error::Validation(format!(
            "{} shards for {} clients",
            shards.len(),
            cfg.num_clients
        )));
    }
    let client_data: Vec<Batch> = shards.iter().map(|s| train.select(&s.indices)).collect();

    let mut global = initial.clone();
    let mut history = Vec::with_capacity(cfg.rounds);
    // Cumulative executed DP steps per client, for the running budget.
    let mut steps_so_far = vec![0usize; cfg.num_clients];

    for round in 0..cfg.rounds {
        let mut selector = selection_stream(master_seed, round as u64);
        let selected = select_clients(cfg.num_clients, cfg.fraction, &mut selector)?;

        let mut updates = Vec::with_capacity(selected.len());
        for &client_id in &selected {
            let state = ClientState {
                client_id,
                shard: shards[client_id].clone(),
                seed: crate::rng::derive_seed(master_seed, &[0xc11e, client_id as u64, round as u64]),
            };
            updates.push(local_update(&global, &state, &client_data[client_id], cfg)?);
        }
        global = Model {
            spec: global.spec,
            params: fedavg(&updates)?,
        };
        let accuracy = models::evaluate(&global, test)?;

        let mut privacy = Vec::new();
        if cfg.dp.is_some() {
            for &client_id in &selected {
                let n = client_data[client_id].len();
                let dp = cfg.client_dp(n).expect("dp enabled");
                let per_epoch = (1.0 / dp.sampling_rate).ceil() as usize;
                steps_so_far[client_id] += cfg.local_epochs * per_epoch;
                let cumulative = DpConfig {
                    steps: steps_so_far[client_id],
                    ..dp
                };
                privacy.push((client_id, epsilon_spent(&cumulative)?));
            }
        }
        history.push(RoundRecord {
            round,
            selected,
            accuracy,
            privacy,
        });
    }
    Ok((global, history))
}
