//! The (setup × ε × model × seed) benchmark grid.

use crate::data::{
    load_corpus, partition_iid, partition_noniid, split_train_test, synth_corpus, LabeledCorpus,
    PartitionMode, PartitionSpec,
};
use crate::dp::{calibrate_sigma, DpConfig};
use crate::error::{Error, Result};
use crate::federated::{run_federated, FlConfig};
use crate::harness::config::{ExperimentConfig, Setup};
use crate::models::{self, featurize_corpus, init_model, Batch, ModelKind, ModelSpec};
use crate::rng::{derive_seed, stream_from_seed};
use std::time::Instant;

// Labels for deriving the independent streams of one cell from its seed.
const INIT_LABEL: u64 = 0x1417;
const TRAIN_LABEL: u64 = 0x7247;
const PARTITION_LABEL: u64 = 0xda7a;
const FEDERATED_LABEL: u64 = 0xfed;

/// One cell of the reported grid: mean ± std over the seed list.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub setup: Setup,
    pub epsilon: f64,
    pub model: ModelKind,
    /// Percent.
    pub mean_accuracy: f64,
    /// Population standard deviation, percent.
    pub std_accuracy: f64,
    pub n_seeds: usize,
    pub delta: f64,
    pub wall_time_secs: f64,
}

/// One seed's accuracy, the raw material behind a [`ResultRow`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub setup: Setup,
    pub epsilon: f64,
    pub model: ModelKind,
    pub seed: u64,
    pub accuracy: f64,
}

/// Corpus state shared by every cell of a run.
pub struct Prepared {
    pub train_corpus: LabeledCorpus,
    pub train: Batch,
    pub test: Batch,
    pub delta: f64,
    /// Category index → original label string, file sources only.
    pub label_names: Option<Vec<String>>,
}

/// Load or synthesize the corpus, split it, and featurize both sides.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (corpus, label_names) = match cfg.data.source {
        crate::harness::config::DataSource::Synth => (
            synth_corpus(
                cfg.data.synth_examples,
                cfg.data.synth_categories,
                cfg.data.feature_dim,
                cfg.data.synth_separation,
                cfg.data.synth_seed,
            )?,
            None,
        ),
        crate::harness::config::DataSource::File => {
            let path = cfg.data.path.as_ref().expect("validated");
            let (corpus, names) = load_corpus(
                path,
                &cfg.data.text_column,
                &cfg.data.label_column,
                cfg.data.delimiter.as_bytes()[0],
            )?;
            (corpus, Some(names))
        }
    };
    let (train_corpus, test_corpus) =
        split_train_test(&corpus, cfg.data.train_fraction, cfg.data.split_seed)?;
    let train = featurize_corpus(&train_corpus, cfg.data.feature_dim, cfg.data.ngram_max)?;
    let test = featurize_corpus(&test_corpus, cfg.data.feature_dim, cfg.data.ngram_max)?;
    let delta = cfg.resolved_delta(train.len());
    Ok(Prepared {
        train_corpus,
        train,
        test,
        delta,
        label_names,
    })
}

fn model_spec(cfg: &ExperimentConfig, kind: ModelKind, num_categories: usize) -> ModelSpec {
    ModelSpec {
        kind,
        input_dim: cfg.data.feature_dim,
        hidden_dim: cfg.hidden_dim,
        num_categories,
    }
}

/// Clip-and-noise configuration for a target ε at sampling rate q over
/// `steps` mechanism invocations.
fn dp_config(
    cfg: &ExperimentConfig,
    delta: f64,
    epsilon: f64,
    q: f64,
    steps: usize,
) -> Result<DpConfig> {
    let sigma = calibrate_sigma(epsilon, delta, q, steps)?;
    Ok(DpConfig {
        clip_norm: cfg.clip_norm,
        noise_multiplier: sigma,
        sampling_rate: q,
        steps,
        delta,
        target_epsilon: epsilon,
    })
}

/// Run one (setup, ε, model, seed) cell; returns test accuracy in [0, 1].
pub(crate) fn run_cell(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    setup: Setup,
    epsilon: f64,
    kind: ModelKind,
    seed: u64,
) -> Result<f64> {
    let spec = model_spec(cfg, kind, prep.train_corpus.num_categories);
    let initial = init_model(&spec, derive_seed(seed, &[INIT_LABEL]))?;
    let n_train = prep.train.len();

    if !setup.is_federated() {
        let mut rng = stream_from_seed(derive_seed(seed, &[TRAIN_LABEL]));
        let trained = if setup.is_dp() {
            let q = (cfg.batch_size as f64 / n_train as f64).min(1.0);
            let steps = cfg.epochs * (1.0 / q).ceil() as usize;
            let dp = dp_config(cfg, prep.delta, epsilon, q, steps)?;
            crate::dp::dpsgd_train(&initial, &prep.train, &dp, cfg.lr, cfg.epochs, &mut rng)?.0
        } else {
            models::sgd_train(
                &initial,
                &prep.train,
                cfg.lr,
                cfg.epochs,
                cfg.batch_size.min(n_train),
                &mut rng,
            )?
        };
        return models::evaluate(&trained, &prep.test);
    }

    let partition_seed = derive_seed(seed, &[PARTITION_LABEL]);
    let shards = if setup.is_noniid() {
        let num_shards = if cfg.fl.num_shards == 0 {
            cfg.fl.num_clients * cfg.fl.shards_per_client
        } else {
            cfg.fl.num_shards
        };
        let shard_size = if cfg.fl.shard_size == 0 {
            n_train / num_shards
        } else {
            cfg.fl.shard_size
        };
        partition_noniid(
            &prep.train_corpus,
            &PartitionSpec {
                mode: PartitionMode::NonIid,
                num_clients: cfg.fl.num_clients,
                num_shards,
                shard_size,
                shards_per_client: cfg.fl.shards_per_client,
                seed: partition_seed,
            },
        )?
    } else {
        partition_iid(&prep.train_corpus, cfg.fl.num_clients, partition_seed)?
    };

    let dp = if setup.is_dp() {
        // Calibrate against the nominal shard: all clients share one sigma
        // and the row's ε is the per-client target.
        let nominal_shard = (n_train / cfg.fl.num_clients).max(1);
        let q = (cfg.batch_size as f64 / nominal_shard as f64).min(1.0);
        let steps = cfg.fl.rounds * cfg.fl.local_epochs * (1.0 / q).ceil() as usize;
        Some(dp_config(cfg, prep.delta, epsilon, q, steps)?)
    } else {
        None
    };
    let fl = FlConfig {
        num_clients: cfg.fl.num_clients,
        fraction: cfg.fl.fraction,
        rounds: cfg.fl.rounds,
        local_epochs: cfg.fl.local_epochs,
        batch_size: cfg.batch_size,
        lr: cfg.lr,
        dp,
    };
    let (global, _history) = run_federated(
        &initial,
        &shards,
        &prep.train,
        &prep.test,
        &fl,
        derive_seed(seed, &[FEDERATED_LABEL]),
    )?;
    models::evaluate(&global, &prep.test)
}

/// ε values in reporting order: ascending, ∞ last.
pub(crate) fn sorted_epsilons(epsilons: &[f64]) -> Vec<f64> {
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("epsilons are not NaN"));
    sorted
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Execute the full grid, invoking `on_row` as each row completes.
///
/// Rows are ordered (setup as listed, ε ascending with ∞ last, model as
/// listed). A cell failure aborts with the cell's coordinates; rows already
/// passed to `on_row` stand.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    on_row: &mut dyn FnMut(&ResultRow, &[RawRecord]),
) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    let mut rows = Vec::new();
    for &setup in &cfg.setups {
        for &epsilon in &sorted_epsilons(&cfg.epsilons) {
            for &kind in &cfg.models {
                let started = Instant::now();
                let mut raw = Vec::with_capacity(cfg.seeds.len());
                for &seed in &cfg.seeds {
                    let accuracy =
                        run_cell(&prep, cfg, setup, epsilon, kind, seed).map_err(|e| {
                            Error::Validation(format!(
                                "cell (setup={}, epsilon={}, model={}, seed={seed}) failed: {e}",
                                setup.key(),
                                crate::harness::report::format_epsilon_csv(epsilon),
                                kind.name()
                            ))
                        })?;
                    raw.push(RawRecord {
                        setup,
                        epsilon,
                        model: kind,
                        seed,
                        accuracy,
                    });
                }
                let accs: Vec<f64> = raw.iter().map(|r| r.accuracy * 100.0).collect();
                let (mean, std) = mean_and_population_std(&accs);
                let row = ResultRow {
                    setup,
                    epsilon,
                    model: kind,
                    mean_accuracy: mean,
                    std_accuracy: std,
                    n_seeds: cfg.seeds.len(),
                    delta: prep.delta,
                    wall_time_secs: started.elapsed().as_secs_f64(),
                };
                on_row(&row, &raw);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// [`run_experiment_with`] without a streaming sink; returns rows plus the
/// per-seed raw log.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<RawRecord>)> {
    let mut raw_log = Vec::new();
    let rows = run_experiment_with(cfg, &mut |_, raw| raw_log.extend_from_slice(raw))?;
    Ok((rows, raw_log))
}
