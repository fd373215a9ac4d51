//! Experiment configuration: TOML grammar, defaults, validation, echo.
//!
//! The full grammar is documented in the repository README. Unknown keys and
//! type mismatches are rejected with the line number reported by the TOML
//! parser; semantic violations are rejected by [`ExperimentConfig::validate`].

use crate::error::{Error, Result};
use crate::models::ModelKind;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::{Path, PathBuf};

/// One of the benchmark's training setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setup {
    #[serde(rename = "centralized")]
    Centralized,
    #[serde(rename = "centralized-dp")]
    CentralizedDp,
    #[serde(rename = "fl-iid")]
    FlIid,
    #[serde(rename = "fl-noniid")]
    FlNonIid,
    #[serde(rename = "dpfl-iid")]
    DpflIid,
    #[serde(rename = "dpfl-noniid")]
    DpflNonIid,
}

impl Setup {
    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "centralized" => Ok(Setup::Centralized),
            "centralized-dp" => Ok(Setup::CentralizedDp),
            "fl-iid" => Ok(Setup::FlIid),
            "fl-noniid" => Ok(Setup::FlNonIid),
            "dpfl-iid" => Ok(Setup::DpflIid),
            "dpfl-noniid" => Ok(Setup::DpflNonIid),
            other => Err(Error::Config(format!("unknown setup `{other}`"))),
        }
    }

    /// Stable machine-readable key, used in CSV output.
    pub fn key(&self) -> &'static str {
        match self {
            Setup::Centralized => "centralized",
            Setup::CentralizedDp => "centralized-dp",
            Setup::FlIid => "fl-iid",
            Setup::FlNonIid => "fl-noniid",
            Setup::DpflIid => "dpfl-iid",
            Setup::DpflNonIid => "dpfl-noniid",
        }
    }

    /// Row-group label used in the markdown table. DP-FL groups carry the
    /// plain FL names: FL is the ε = ∞ row of the same group.
    pub fn display(&self) -> &'static str {
        match self {
            Setup::Centralized => "Centralized",
            Setup::CentralizedDp => "Centralized DP",
            Setup::FlIid | Setup::DpflIid => "FL-IID",
            Setup::FlNonIid | Setup::DpflNonIid => "FL-Non IID",
        }
    }

    pub fn is_federated(&self) -> bool {
        !matches!(self, Setup::Centralized | Setup::CentralizedDp)
    }

    pub fn is_dp(&self) -> bool {
        matches!(self, Setup::CentralizedDp | Setup::DpflIid | Setup::DpflNonIid)
    }

    pub fn is_noniid(&self) -> bool {
        matches!(self, Setup::FlNonIid | Setup::DpflNonIid)
    }
}

/// A privacy budget that may be infinite; `"inf"` in config files and CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eps(pub f64);

impl Serialize for Eps {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Eps {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let value = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => v,
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
            Raw::Text(s) => return Err(D::Error::custom(format!("bad epsilon `{s}`"))),
        };
        if !(value > 0.0) {
            return Err(D::Error::custom(format!("epsilon must be > 0, got {value}")));
        }
        Ok(Eps(value))
    }
}

fn default_text_column() -> String {
    "text".into()
}
fn default_label_column() -> String {
    "label".into()
}
fn default_delimiter() -> String {
    ",".into()
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synth,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_text_column")]
    pub text_column: String,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default)]
    pub synth_examples: usize,
    #[serde(default)]
    pub synth_categories: usize,
    #[serde(default)]
    pub synth_separation: f64,
    #[serde(default)]
    pub synth_seed: u64,
    pub feature_dim: usize,
    #[serde(default = "default_one")]
    pub ngram_max: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
}

fn default_hidden_dim() -> usize {
    16
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { hidden_dim: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpSection {
    #[serde(default = "default_clip_norm")]
    pub clip_norm: f64,
    /// When absent, resolved to min(1e-5, 1/(2·N_train)).
    #[serde(default)]
    pub delta: Option<f64>,
}

fn default_clip_norm() -> f64 {
    1.0
}

impl Default for DpSection {
    fn default() -> Self {
        Self {
            clip_norm: 1.0,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlSection {
    pub num_clients: usize,
    pub fraction: f64,
    pub rounds: usize,
    #[serde(default = "default_one")]
    pub local_epochs: usize,
    #[serde(default)]
    pub num_shards: usize,
    #[serde(default = "default_one")]
    pub shards_per_client: usize,
    /// 0 resolves to ⌊train size / num_shards⌋.
    #[serde(default)]
    pub shard_size: usize,
}

impl Default for FlSection {
    fn default() -> Self {
        Self {
            num_clients: 10,
            fraction: 0.5,
            rounds: 10,
            local_epochs: 1,
            num_shards: 0,
            shards_per_client: 1,
            shard_size: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    setups: Vec<Setup>,
    epsilons: Vec<Eps>,
    models: Vec<String>,
    seeds: Vec<u64>,
    output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentSection,
    data: DataConfig,
    #[serde(default)]
    model: ModelSection,
    train: TrainSection,
    #[serde(default)]
    dp: DpSection,
    #[serde(default)]
    fl: FlSection,
}

/// A validated experiment configuration with all defaults resolved.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub setups: Vec<Setup>,
    pub epsilons: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub hidden_dim: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub clip_norm: f64,
    pub delta: Option<f64>,
    pub fl: FlSection,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let named = |what: &str| Err(Error::Config(what.to_string()));
        if self.setups.is_empty() || self.epsilons.is_empty() || self.models.is_empty() {
            return named("setups, epsilons, and models must be non-empty");
        }
        if self.seeds.is_empty() {
            return named("seeds must be non-empty");
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return named("epsilons must be > 0 or inf");
        }
        match self.data.source {
            DataSource::File => {
                if self.data.path.is_none() {
                    return named("data.path required for source = \"file\"");
                }
                if self.data.delimiter.len() != 1 || !self.data.delimiter.is_ascii() {
                    return named("data.delimiter must be a single ASCII character");
                }
            }
            DataSource::Synth => {
                if self.data.synth_examples == 0 || self.data.synth_categories < 2 {
                    return named("synth_examples and synth_categories must be set for synth data");
                }
                if self.data.synth_separation < 0.0 {
                    return named("synth_separation must be >= 0");
                }
            }
        }
        if self.data.feature_dim < 2 {
            return named("data.feature_dim must be >= 2");
        }
        if !(1..=2).contains(&self.data.ngram_max) {
            return named("data.ngram_max must be 1 or 2");
        }
        if !(self.data.train_fraction > 0.0 && self.data.train_fraction < 1.0) {
            return named("data.train_fraction must be in (0, 1)");
        }
        if !(self.lr > 0.0) || self.batch_size == 0 || self.epochs == 0 {
            return named("train.lr must be > 0; batch_size and epochs >= 1");
        }
        if !(self.clip_norm > 0.0) {
            return named("dp.clip_norm must be > 0");
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta < 1.0) {
                return named("dp.delta must be in (0, 1)");
            }
        }
        if self.setups.iter().any(Setup::is_federated) {
            if self.fl.num_clients == 0 || self.fl.rounds == 0 || self.fl.local_epochs == 0 {
                return named("fl.num_clients, rounds, local_epochs must be >= 1");
            }
            if !(self.fl.fraction > 0.0 && self.fl.fraction <= 1.0) {
                return named("fl.fraction must be in (0, 1]");
            }
        }
        Ok(())
    }

    /// δ to use for a training set of `n_train` examples.
    pub fn resolved_delta(&self, n_train: usize) -> f64 {
        self.delta
            .unwrap_or_else(|| (1e-5f64).min(1.0 / (2.0 * n_train as f64)))
    }

    /// Echo the resolved configuration as TOML for provenance.
    pub fn to_resolved_toml(&self) -> String {
        let raw = RawConfig {
            experiment: ExperimentSection {
                setups: self.setups.clone(),
                epsilons: self.epsilons.iter().map(|&e| Eps(e)).collect(),
                models: self.models.iter().map(|m| m.name().to_string()).collect(),
                seeds: self.seeds.clone(),
                output_dir: self.output_dir.clone(),
            },
            data: self.data.clone(),
            model: ModelSection {
                hidden_dim: self.hidden_dim,
            },
            train: TrainSection {
                lr: self.lr,
                batch_size: self.batch_size,
                epochs: self.epochs,
            },
            dp: DpSection {
                clip_norm: self.clip_norm,
                delta: self.delta,
            },
            fl: self.fl.clone(),
        };
        toml::to_string_pretty(&raw).expect("resolved config serializes")
    }
}

/// Parse and validate a configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let models = raw
        .experiment
        .models
        .iter()
        .map(|m| ModelKind::from_name(m))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ExperimentConfig {
        setups: raw.experiment.setups,
        epsilons: raw.experiment.epsilons.iter().map(|e| e.0).collect(),
        models,
        seeds: raw.experiment.seeds,
        output_dir: raw.experiment.output_dir,
        data: raw.data,
        hidden_dim: raw.model.hidden_dim,
        lr: raw.train.lr,
        batch_size: raw.train.batch_size,
        epochs: raw.train.epochs,
        clip_norm: raw.dp.clip_norm,
        delta: raw.dp.delta,
        fl: raw.fl,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {path:?}: {e}")))?;
    parse_config_str(&text)
}
