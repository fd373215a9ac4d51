//! Desk-scale benchmarking of differentially private training, federated
//! learning, and their composition on text-classification tasks.
//!
//! The crate is organized around five subsystems:
//!
//! - [`data`]: corpus ingestion, cleaning, feature hashing, train/test
//!   splitting, and IID / non-IID client partitioning.
//! - [`models`]: small softmax classifiers (linear, one-hidden-layer MLP)
//!   with exact per-example gradients.
//! - [`dp`]: the clip-and-noise DP-SGD mechanism, a Rényi-DP accountant for
//!   the subsampled Gaussian mechanism, σ↔ε calibration, and a brute-force
//!   (ε, δ) verifier for discrete mechanisms.
//! - [`federated`]: simulated FedAvg with client sampling and optional
//!   per-client local DP.
//! - [`harness`]: experiment grids over (setup × ε × model × seed) with
//!   deterministic mean ± std reporting.

pub mod data;
pub mod dp;
pub mod error;
pub mod federated;
pub mod harness;
pub mod models;
pub mod rng;

pub use data::{ClientShard, FeatureVector, LabeledCorpus, PartitionSpec};
pub use dp::{DpConfig, PrivacySpent, RdpCurve};
pub use error::{Error, Result};
pub use federated::{ClientUpdate, FlConfig, RoundRecord};
pub use harness::{ExperimentConfig, ResultRow};
pub use models::{Batch, Gradient, Model, ModelSpec};
