//! IID and label-sorted non-IID client partitioning.

use crate::data::LabeledCorpus;
use crate::error::{Error, Result};
use crate::rng::stream_from_seed;
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    Iid,
    NonIid,
}

/// How to carve a training corpus into client shards.
#[derive(Debug, Clone)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    pub num_clients: usize,
    /// Non-IID only: total number of label-sorted shards.
    pub num_shards: usize,
    /// Non-IID only: nominal examples per shard.
    pub shard_size: usize,
    /// Non-IID only: shards dealt to each client.
    pub shards_per_client: usize,
    pub seed: u64,
}

impl PartitionSpec {
    pub fn validate(&self, corpus_size: usize) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::Validation("num_clients must be >= 1".into()));
        }
        if self.mode == PartitionMode::NonIid {
            if self.num_shards != self.num_clients * self.shards_per_client {
                return Err(Error::Validation(format!(
                    "num_shards ({}) must equal num_clients ({}) x shards_per_client ({})",
                    self.num_shards, self.num_clients, self.shards_per_client
                )));
            }
            if self.shard_size * self.num_shards > corpus_size {
                return Err(Error::Validation(format!(
                    "shard_size ({}) x num_shards ({}) exceeds corpus size {}",
                    self.shard_size, self.num_shards, corpus_size
                )));
            }
        }
        Ok(())
    }
}

/// One client's slice of the training corpus, as indices into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientShard {
    pub client_id: usize,
    pub indices: Vec<usize>,
}

/// Uniform shuffle under `seed`, then round-robin deal. Shard sizes differ by
/// at most one.
pub fn partition_iid(
    train: &LabeledCorpus,
    num_clients: usize,
    seed: u64,
) -> Result<Vec<ClientShard>> {
    if num_clients == 0 {
        return Err(Error::Validation("num_clients must be >= 1".into()));
    }
    if num_clients > train.len() {
        return Err(Error::Validation(format!(
            "num_clients ({num_clients}) exceeds train size ({})",
            train.len()
        )));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut stream_from_seed(seed));

    let mut shards: Vec<ClientShard> = (0..num_clients)
        .map(|client_id| ClientShard {
            client_id,
            indices: Vec::new(),
        })
        .collect();
    for (position, index) in order.into_iter().enumerate() {
        shards[position % num_clients].indices.push(index);
    }
    Ok(shards)
}

/// Sort train indices by label (ties by index), cut into `num_shards`
/// consecutive shards of `shard_size`, spread any leftover one-per-shard
/// starting at shard 0, then deal shards to clients by a seeded permutation.
pub fn partition_noniid(train: &LabeledCorpus, spec: &PartitionSpec) -> Result<Vec<ClientShard>> {
    if spec.mode != PartitionMode::NonIid {
        return Err(Error::Validation(
            "partition_noniid requires mode = noniid".into(),
        ));
    }
    spec.validate(train.len())?;
    if spec.shard_size == 0 {
        return Err(Error::Validation("shard_size must be >= 1".into()));
    }

    let mut sorted: Vec<usize> = (0..train.len()).collect();
    sorted.sort_by_key(|&i| (train.examples[i].1, i));

    // Consecutive cuts of shard_size, then leftovers one-per-shard from 0.
    let base = spec.shard_size * spec.num_shards;
    let mut shards_idx: Vec<Vec<usize>> = (0..spec.num_shards)
        .map(|s| sorted[s * spec.shard_size..(s + 1) * spec.shard_size].to_vec())
        .collect();
    for (offset, &leftover) in sorted[base..].iter().enumerate() {
        shards_idx[offset % spec.num_shards].push(leftover);
    }

    let mut deal: Vec<usize> = (0..spec.num_shards).collect();
    deal.shuffle(&mut stream_from_seed(spec.seed));

    let mut clients: Vec<ClientShard> = (0..spec.num_clients)
        .map(|client_id| ClientShard {
            client_id,
            indices: Vec::new(),
        })
        .collect();
    for (position, &shard) in deal.iter().enumerate() {
        let client = position / spec.shards_per_client;
        clients[client]
            .indices
            .extend(shards_idx[shard].iter().copied());
    }
    Ok(clients)
}
