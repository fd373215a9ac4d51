//! Corpus ingestion, splitting, and client partitioning.

mod clean;
mod features;
mod partition;
mod synth;

pub use clean::clean_text;
pub use features::{featurize, FeatureVector};
pub use partition::{partition_iid, partition_noniid, ClientShard, PartitionMode, PartitionSpec};
pub use synth::synth_corpus;

use crate::error::{Error, Result};
use crate::rng::stream_from_seed;
use rand::seq::SliceRandom;
use std::path::Path;

/// Texts with categorical labels. The unit of ingestion, splitting, and
/// partitioning. Example order is significant: indices into `examples` are
/// stable identities used by [`ClientShard`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub examples: Vec<(String, usize)>,
    pub num_categories: usize,
}

impl LabeledCorpus {
    pub fn new(examples: Vec<(String, usize)>, num_categories: usize) -> Result<Self> {
        if num_categories < 2 {
            return Err(Error::Validation(format!(
                "corpus needs at least 2 categories, got {num_categories}"
            )));
        }
        if examples.is_empty() {
            return Err(Error::Validation("corpus has no examples".into()));
        }
        if let Some((i, (_, label))) = examples
            .iter()
            .enumerate()
            .find(|(_, (_, l))| *l >= num_categories)
        {
            return Err(Error::Validation(format!(
                "example {i} has label {label} >= num_categories {num_categories}"
            )));
        }
        Ok(Self {
            examples,
            num_categories,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Per-category example counts.
    pub fn label_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_categories];
        for (_, label) in &self.examples {
            counts[*label] += 1;
        }
        counts
    }
}

/// Load a delimiter-separated corpus with a header row.
///
/// Labels are mapped to 0-based category indices by first-appearance order;
/// the returned mapping lists the original label string per index so callers
/// can emit it as run metadata.
pub fn load_corpus(
    path: &Path,
    text_column: &str,
    label_column: &str,
    delimiter: u8,
) -> Result<(LabeledCorpus, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column `{name}` not found in {path:?}")))
    };
    let text_idx = find(text_column)?;
    let label_idx = find(label_column)?;

    let mut label_names: Vec<String> = Vec::new();
    let mut examples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        // +2: one for the header, one for 1-based line numbering.
        let line = row + 2;
        let record =
            record.map_err(|e| Error::Validation(format!("unreadable row at line {line}: {e}")))?;
        let text = record
            .get(text_idx)
            .ok_or_else(|| Error::Validation(format!("missing text field at line {line}")))?;
        let label = record
            .get(label_idx)
            .ok_or_else(|| Error::Validation(format!("missing label field at line {line}")))?;
        let label_id = match label_names.iter().position(|l| l == label) {
            Some(id) => id,
            None => {
                label_names.push(label.to_string());
                label_names.len() - 1
            }
        };
        examples.push((text.to_string(), label_id));
    }

    if label_names.len() < 2 {
        return Err(Error::Validation(format!(
            "label column `{label_column}` has {} distinct value(s); need at least 2",
            label_names.len()
        )));
    }
    let corpus = LabeledCorpus::new(examples, label_names.len())?;
    Ok((corpus, label_names))
}

/// Uniform shuffle under `seed`, then the first ⌊n·fraction⌋ examples are
/// train and the remainder test.
pub fn split_train_test(
    corpus: &LabeledCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = corpus.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Validation(format!(
            "split of {n} examples at fraction {train_fraction} leaves one side empty"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_from_seed(seed));

    let take = |indices: &[usize]| {
        let examples = indices
            .iter()
            .map(|&i| corpus.examples[i].clone())
            .collect();
        LabeledCorpus {
            examples,
            num_categories: corpus.num_categories,
        }
    };
    Ok((take(&order[..n_train]), take(&order[n_train..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn first_appearance_label_mapping() {
        let f = write_csv("text,label\nfeeling low,dep\nfine today,ctrl\nso tired,dep\n");
        let (corpus, names) = load_corpus(f.path(), "text", "label", b',').unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.num_categories, 2);
        let labels: Vec<usize> = corpus.examples.iter().map(|(_, l)| *l).collect();
        assert_eq!(labels, vec![0, 1, 0]);
        assert_eq!(names, vec!["dep".to_string(), "ctrl".to_string()]);
    }

    #[test]
    fn missing_column_is_config_error() {
        let f = write_csv("text,label\na,b\nc,d\n");
        let err = load_corpus(f.path(), "tweet", "label", b',').unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn single_label_is_validation_error() {
        let f = write_csv("text,label\na,x\nb,x\nc,x\n");
        let err = load_corpus(f.path(), "text", "label", b',').unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn custom_delimiter() {
        let f = write_csv("text\tlabel\nhello there\tpos\nbye now\tneg\n");
        let (corpus, _) = load_corpus(f.path(), "text", "label", b'\t').unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.examples[0].0, "hello there");
    }

    fn toy_corpus(n: usize) -> LabeledCorpus {
        let examples = (0..n).map(|i| (format!("t{i}"), i % 2)).collect();
        LabeledCorpus::new(examples, 2).unwrap()
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let corpus = toy_corpus(3096);
        let (train, test) = split_train_test(&corpus, 0.8, 1).unwrap();
        assert_eq!(train.len(), 2476);
        assert_eq!(test.len(), 620);

        let corpus = toy_corpus(10);
        let (train, test) = split_train_test(&corpus, 0.8, 1).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn split_is_deterministic_and_exact() {
        let corpus = toy_corpus(101);
        let (tr1, te1) = split_train_test(&corpus, 0.8, 7).unwrap();
        let (tr2, te2) = split_train_test(&corpus, 0.8, 7).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);

        let mut all: Vec<&str> = tr1
            .examples
            .iter()
            .chain(te1.examples.iter())
            .map(|(t, _)| t.as_str())
            .collect();
        all.sort_unstable();
        let mut expected: Vec<String> = (0..101).map(|i| format!("t{i}")).collect();
        expected.sort_unstable();
        assert_eq!(all, expected.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_split_rejected() {
        let corpus = toy_corpus(3);
        assert!(split_train_test(&corpus, 0.1, 1).is_err());
        assert!(split_train_test(&corpus, 1.5, 1).is_err());
    }

    #[test]
    fn corpus_invariants_enforced() {
        assert!(LabeledCorpus::new(vec![("a".into(), 0)], 1).is_err());
        assert!(LabeledCorpus::new(vec![], 2).is_err());
        assert!(LabeledCorpus::new(vec![("a".into(), 2)], 2).is_err());
    }
}
