//! Text cleaning for tweet-like input.

/// Lowercase, drop URLs and @-mentions, strip `#` while keeping the hashtag
/// word, and collapse whitespace runs. Idempotent.
pub fn clean_text(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut words = Vec::new();
    for token in lowered.split_whitespace() {
        // '#' removal happens before the prefix filters so that a token like
        // "#http://x" is fully dropped on the first pass (idempotence).
        let kept: String = token.chars().filter(|&c| c != '#').collect();
        if kept.starts_with("http://") || kept.starts_with("https://") || kept.starts_with('@') {
            continue;
        }
        if !kept.is_empty() {
            words.push(kept);
        }
    }
    words.join(" ")
}
