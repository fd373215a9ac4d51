//! Experiment grids, seed fan-out, and mean ± std reporting.

mod config;
mod experiment;
mod report;

pub use config::{
    parse_config, parse_config_str, DataConfig, DataSource, Eps, ExperimentConfig, Setup,
};
pub use experiment::{prepare, run_experiment, run_experiment_with, Prepared, RawRecord, ResultRow};
pub use report::{config_digest, emit_plot_data, emit_raw_log, emit_table, TableFormat};
