//! Synthetic pseudo-token corpora for tests and demos.

use crate::data::LabeledCorpus;
use crate::error::{Error, Result};
use crate::rng::stream_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;

const TOKENS_PER_EXAMPLE: usize = 16;
const CLASS_VOCAB: usize = 8;

/// Generate a balanced labeled corpus of pseudo-token texts.
///
/// Each text is a mixture of class-signature tokens and background tokens;
/// `separation` controls the mixing rate. At `separation = 0` texts carry no
/// label signal (chance-level learnability); large separation yields linearly
/// separable hashed features. Rendering through text keeps the whole
/// clean/featurize pipeline in the loop for end-to-end tests.
pub fn synth_corpus(
    num_examples: usize,
    num_categories: usize,
    feature_dim: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledCorpus> {
    if separation < 0.0 {
        return Err(Error::Validation(format!(
            "separation must be >= 0, got {separation}"
        )));
    }
    if num_examples < num_categories {
        return Err(Error::Validation(format!(
            "num_examples ({num_examples}) < num_categories ({num_categories})"
        )));
    }
    let background_vocab = feature_dim.max(16);
    let signal_rate = separation / (separation + 1.0);
    let mut rng = stream_from_seed(seed);

    let mut examples: Vec<(String, usize)> = (0..num_examples)
        .map(|i| {
            let label = i % num_categories;
            let tokens: Vec<String> = (0..TOKENS_PER_EXAMPLE)
                .map(|_| {
                    if rng.random::<f64>() < signal_rate {
                        format!("c{label}w{}", rng.random_range(0..CLASS_VOCAB))
                    } else {
                        format!("bg{}", rng.random_range(0..background_vocab))
                    }
                })
                .collect();
            (tokens.join(" "), label)
        })
        .collect();
    examples.shuffle(&mut rng);

    LabeledCorpus::new(examples, num_categories)
}
