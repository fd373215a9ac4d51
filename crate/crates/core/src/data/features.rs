//! Hashing-trick bag of word n-grams.

use crate::error::{Error, Result};

/// Fixed-length real feature vector produced by [`featurize`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// FNV-1a, 64-bit. Hand-rolled so the hash is stable across platforms and
/// library versions; `DefaultHasher` makes no such promise.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Map cleaned text to a signed hashed n-gram count vector, L2-normalized
/// when nonzero.
///
/// Each word n-gram (n ≤ `ngram_max`) hashes to `index = hash % feature_dim`;
/// the top hash bit picks the sign. Empty text yields the zero vector.
pub fn featurize(text: &str, feature_dim: usize, ngram_max: usize) -> Result<FeatureVector> {
    if feature_dim < 2 {
        return Err(Error::Validation(format!(
            "feature_dim must be >= 2, got {feature_dim}"
        )));
    }
    if !(1..=2).contains(&ngram_max) {
        return Err(Error::Validation(format!(
            "ngram_max must be 1 or 2, got {ngram_max}"
        )));
    }

    let words: Vec<&str> = text.split_whitespace().collect();
    let mut values = vec![0.0f64; feature_dim];
    let mut add = |gram: &str| {
        let hash = fnv1a64(gram.as_bytes());
        let index = (hash % feature_dim as u64) as usize;
        let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
        values[index] += sign;
    };
    for (i, word) in words.iter().enumerate() {
        add(word);
        if ngram_max == 2 && i + 1 < words.len() {
            add(&format!("{word} {}", words[i + 1]));
        }
    }

    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    Ok(FeatureVector { values })
}
