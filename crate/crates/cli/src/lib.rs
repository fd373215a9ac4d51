//! Command-line front end: run experiments, render tables, calibrate noise,
//! inspect partitions, verify discrete mechanisms.

use clap::{Parser, Subcommand};
use dpfl_core::data::{partition_iid, partition_noniid, PartitionMode, PartitionSpec};
use dpfl_core::dp::{
    calibrate_sigma, default_orders, rdp_subsampled_gaussian, rdp_to_dp, verify_dp_enumeration,
    DiscreteMechanism,
};
use dpfl_core::harness::{
    config_digest, emit_plot_data, emit_raw_log, emit_table, parse_config, run_experiment_with,
    RawRecord, ResultRow, Setup, TableFormat,
};
use dpfl_core::models::ModelKind;
use dpfl_core::{Error, Result};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "dpfl", version, about = "Benchmark DP, FL, and DP-FL training on text classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid from a config file and write result files.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-render a results.csv as a table.
    Table {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: String,
    },
    /// Solve for the noise multiplier hitting a target epsilon.
    Calibrate {
        /// Target epsilon, a number or "inf".
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Print per-client shard sizes and label histograms for a config.
    PartitionStats {
        #[arg(long)]
        config: PathBuf,
        /// "iid" or "noniid".
        #[arg(long, default_value = "iid")]
        mode: String,
    },
    /// Check a discrete mechanism fixture against (epsilon, delta)-DP.
    VerifyDp {
        /// JSON fixture with datasets, outcomes, adjacency, outcome_dist.
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
}

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 validation/configuration failure, 2 runtime error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Clap prints help/version through this path too.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Validation(_) | Error::Calibration(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { config } => cmd_run(&config),
        Command::Table { results, format } => cmd_table(&results, &format),
        Command::Calibrate {
            epsilon,
            delta,
            q,
            steps,
        } => cmd_calibrate(&epsilon, delta, q, steps),
        Command::PartitionStats { config, mode } => cmd_partition_stats(&config, &mode),
        Command::VerifyDp {
            fixture,
            epsilon,
            delta,
        } => cmd_verify_dp(&fixture, epsilon, delta),
    }
}

fn write_outputs(
    out_dir: &Path,
    rows: &[ResultRow],
    raw: &[RawRecord],
    digest: &str,
) -> Result<()> {
    std::fs::write(
        out_dir.join("results.md"),
        emit_table(rows, TableFormat::Markdown, digest),
    )?;
    std::fs::write(
        out_dir.join("results.csv"),
        emit_table(rows, TableFormat::Csv, digest),
    )?;
    std::fs::write(out_dir.join("plot.csv"), emit_plot_data(rows, digest))?;
    std::fs::write(out_dir.join("raw_accuracies.csv"), emit_raw_log(raw, digest))?;
    Ok(())
}

fn cmd_run(config_path: &Path) -> Result<i32> {
    let cfg = parse_config(config_path)?;
    let out_dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&out_dir)?;

    let resolved = cfg.to_resolved_toml();
    std::fs::write(out_dir.join("resolved_config"), &resolved)?;
    let digest = config_digest(&resolved);

    if matches!(cfg.data.source, dpfl_core::harness::DataSource::File) {
        let prep = dpfl_core::harness::prepare(&cfg)?;
        if let Some(names) = &prep.label_names {
            let mapping: String = names
                .iter()
                .enumerate()
                .map(|(i, name)| format!("{i},{name}\n"))
                .collect();
            std::fs::write(out_dir.join("label_mapping.txt"), mapping)?;
        }
    }

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut raw: Vec<RawRecord> = Vec::new();
    let outcome = run_experiment_with(&cfg, &mut |row, row_raw| {
        println!(
            "{} eps={} {}: {:.2} ± {:.2} ({} seeds, {:.1}s)",
            row.setup.key(),
            if row.epsilon.is_infinite() {
                "inf".to_string()
            } else {
                format!("{}", row.epsilon)
            },
            row.model.name(),
            row.mean_accuracy,
            row.std_accuracy,
            row.n_seeds,
            row.wall_time_secs
        );
        rows.push(row.clone());
        raw.extend_from_slice(row_raw);
    });

    // Completed rows are flushed even when a later cell fails.
    write_outputs(&out_dir, &rows, &raw, &digest)?;
    outcome?;
    println!("wrote {}", out_dir.display());
    Ok(0)
}

fn parse_results_csv(path: &Path) -> Result<(Vec<ResultRow>, String)> {
    let text = std::fs::read_to_string(path)?;
    let mut digest = String::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# config_digest: ") {
            digest = rest.to_string();
            continue;
        }
        if line.starts_with('#') || line.starts_with("setup,") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Validation(format!("bad results line: {line}")));
        }
        let epsilon = if fields[1] == "inf" {
            f64::INFINITY
        } else {
            fields[1]
                .parse()
                .map_err(|_| Error::Validation(format!("bad epsilon: {}", fields[1])))?
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad number: {s}")))
        };
        rows.push(ResultRow {
            setup: Setup::from_key(fields[0])?,
            epsilon,
            model: ModelKind::from_name(fields[2])?,
            mean_accuracy: parse_f64(fields[3])?,
            std_accuracy: parse_f64(fields[4])?,
            n_seeds: fields[5]
                .parse()
                .map_err(|_| Error::Validation(format!("bad n_seeds: {}", fields[5])))?,
            delta: parse_f64(fields[6])?,
            wall_time_secs: 0.0,
        });
    }
    Ok((rows, digest))
}

fn cmd_table(results: &Path, format: &str) -> Result<i32> {
    let format = match format {
        "markdown" => TableFormat::Markdown,
        "csv" => TableFormat::Csv,
        other => return Err(Error::Config(format!("unknown table format `{other}`"))),
    };
    let (rows, digest) = parse_results_csv(results)?;
    if rows.is_empty() {
        return Err(Error::Validation("no result rows".into()));
    }
    print!("{}", emit_table(&rows, format, &digest));
    Ok(0)
}

fn cmd_calibrate(epsilon: &str, delta: f64, q: f64, steps: usize) -> Result<i32> {
    let target = if epsilon.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        epsilon
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad epsilon `{epsilon}`")))?
    };
    let sigma = calibrate_sigma(target, delta, q, steps)?;
    println!("sigma,order");
    if sigma == 0.0 {
        println!("0,none");
    } else {
        let curve = rdp_subsampled_gaussian(sigma, q, steps, &default_orders())?;
        let conversion = rdp_to_dp(&curve, delta)?;
        println!("{sigma},{}", conversion.best_order);
    }
    Ok(0)
}

fn cmd_partition_stats(config_path: &Path, mode: &str) -> Result<i32> {
    let cfg = parse_config(config_path)?;
    let prep_seed = *cfg.seeds.first().expect("validated non-empty");
    let prep = dpfl_core::harness::prepare(&cfg)?;
    let train = &prep.train_corpus;
    let partition_seed = dpfl_core::rng::derive_seed(prep_seed, &[0xda7a]);
    let shards = match mode {
        "iid" => partition_iid(train, cfg.fl.num_clients, partition_seed)?,
        "noniid" => {
            let num_shards = if cfg.fl.num_shards == 0 {
                cfg.fl.num_clients * cfg.fl.shards_per_client
            } else {
                cfg.fl.num_shards
            };
            let shard_size = if cfg.fl.shard_size == 0 {
                train.len() / num_shards
            } else {
                cfg.fl.shard_size
            };
            partition_noniid(
                train,
                &PartitionSpec {
                    mode: PartitionMode::NonIid,
                    num_clients: cfg.fl.num_clients,
                    num_shards,
                    shard_size,
                    shards_per_client: cfg.fl.shards_per_client,
                    seed: partition_seed,
                },
            )?
        }
        other => return Err(Error::Config(format!("unknown partition mode `{other}`"))),
    };

    let header: Vec<String> = (0..train.num_categories)
        .map(|c| format!("label{c}"))
        .collect();
    println!("client,size,{}", header.join(","));
    for shard in &shards {
        let mut histogram = vec![0usize; train.num_categories];
        for &i in &shard.indices {
            histogram[train.examples[i].1] += 1;
        }
        let cells: Vec<String> = histogram.iter().map(|c| c.to_string()).collect();
        println!(
            "{},{},{}",
            shard.client_id,
            shard.indices.len(),
            cells.join(",")
        );
    }
    Ok(0)
}

fn cmd_verify_dp(fixture: &Path, epsilon: f64, delta: f64) -> Result<i32> {
    let text = std::fs::read_to_string(fixture)?;
    let mechanism: DiscreteMechanism = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("bad fixture {fixture:?}: {e}")))?;
    let report = verify_dp_enumeration(&mechanism, epsilon, delta)?;
    let witness_outcomes: Vec<&str> = report
        .witness_set
        .iter()
        .map(|&o| mechanism.outcomes[o].as_str())
        .collect();
    println!(
        "{} epsilon={epsilon} delta={delta} worst_slack={} witness_pair=({},{}) witness_set={{{}}}",
        if report.holds { "PASS" } else { "FAIL" },
        report.worst_slack,
        mechanism.datasets[report.witness_pair.0],
        mechanism.datasets[report.witness_pair.1],
        witness_outcomes.join(",")
    );
    Ok(if report.holds { 0 } else { 1 })
}
