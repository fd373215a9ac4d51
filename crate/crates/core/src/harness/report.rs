//! Deterministic rendering of result tables, plot data, and raw logs.

use crate::harness::experiment::{RawRecord, ResultRow};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

/// Hex SHA-256 of the resolved configuration text, embedded in every
/// emitted file for provenance.
pub fn config_digest(resolved_config: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(resolved_config.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn format_epsilon_csv(epsilon: f64) -> String {
    if epsilon.is_infinite() {
        "inf".into()
    } else {
        format!("{epsilon}")
    }
}

fn format_epsilon_markdown(epsilon: f64) -> String {
    if epsilon.is_infinite() {
        "∞ (No noise)".into()
    } else {
        format!("{epsilon}")
    }
}

/// Render the grouped Setup × Epsilon × Model table.
///
/// Markdown mirrors the benchmark's reporting shape: one row group per
/// setup, one column per model, cells "mean ± std" at two decimals. CSV is
/// the same data one row per (setup, ε, model). Byte-deterministic given the
/// rows.
pub fn emit_table(rows: &[ResultRow], format: TableFormat, digest: &str) -> String {
    match format {
        TableFormat::Markdown => emit_markdown(rows, digest),
        TableFormat::Csv => emit_csv(rows, digest),
    }
}

fn emit_markdown(rows: &[ResultRow], digest: &str) -> String {
    let mut models = Vec::new();
    for row in rows {
        if !models.contains(&row.model) {
            models.push(row.model);
        }
    }
    let mut out = String::new();
    out.push_str(&format!("<!-- config_digest: {digest} -->\n"));
    out.push_str("<!-- cells: mean ± population std of test accuracy (%), over seeds -->\n\n");
    out.push_str("| Setup | Epsilon |");
    for model in &models {
        out.push_str(&format!(" {} |", model.name()));
    }
    out.push('\n');
    out.push_str("|---|---|");
    for _ in &models {
        out.push_str("---|");
    }
    out.push('\n');

    let mut previous_group: Option<String> = None;
    let mut groups: Vec<(String, f64)> = Vec::new();
    for row in rows {
        let key = (row.setup.display().to_string(), row.epsilon);
        if !groups
            .iter()
            .any(|(s, e)| *s == key.0 && (*e == key.1 || (e.is_infinite() && key.1.is_infinite())))
        {
            groups.push(key);
        }
    }
    for (setup_name, epsilon) in &groups {
        let label = if previous_group.as_deref() == Some(setup_name) {
            ""
        } else {
            previous_group = Some(setup_name.clone());
            setup_name
        };
        out.push_str(&format!(
            "| {label} | {} |",
            format_epsilon_markdown(*epsilon)
        ));
        for model in &models {
            let cell = rows
                .iter()
                .find(|r| {
                    r.setup.display() == setup_name
                        && (r.epsilon == *epsilon
                            || (r.epsilon.is_infinite() && epsilon.is_infinite()))
                        && r.model == *model
                })
                .map(|r| format!("{:.2} ± {:.2}", r.mean_accuracy, r.std_accuracy))
                .unwrap_or_else(|| "—".into());
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

fn emit_csv(rows: &[ResultRow], digest: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_digest: {digest}\n"));
    out.push_str("# std is the population standard deviation over seeds\n");
    out.push_str("setup,epsilon,model,mean_accuracy,std_accuracy,n_seeds,delta\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2},{},{:e}\n",
            row.setup.key(),
            format_epsilon_csv(row.epsilon),
            row.model.name(),
            row.mean_accuracy,
            row.std_accuracy,
            row.n_seeds,
            row.delta
        ));
    }
    out
}

/// ε-vs-accuracy series for external plotting; ∞ encoded as `inf`.
pub fn emit_plot_data(rows: &[ResultRow], digest: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_digest: {digest}\n"));
    out.push_str("setup,model,epsilon,mean_accuracy,std_accuracy\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2}\n",
            row.setup.key(),
            row.model.name(),
            format_epsilon_csv(row.epsilon),
            row.mean_accuracy,
            row.std_accuracy
        ));
    }
    out
}

/// Full-precision per-seed accuracy log, the input to the independent
/// aggregation oracle.
pub fn emit_raw_log(records: &[RawRecord], digest: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_digest: {digest}\n"));
    out.push_str("setup,epsilon,model,seed,accuracy\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.setup.key(),
            format_epsilon_csv(r.epsilon),
            r.model.name(),
            r.seed,
            r.accuracy
        ));
    }
    out
}
