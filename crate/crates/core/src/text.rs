//! Small string helpers shared by the catalog, retriever and scorer.

use std::collections::BTreeSet;

/// Lowercases, trims and collapses internal whitespace runs to one space.
pub fn fold(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lowercase alphanumeric word tokens, in order of appearance.
pub fn words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

pub fn word_set(s: &str) -> BTreeSet<String> {
    words(s).collect()
}

/// Character trigrams of the folded string, padded with one space on each side.
pub fn trigrams(s: &str) -> BTreeSet<String> {
    let padded: Vec<char> = format!(" {} ", fold(s)).chars().collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

pub fn dice(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 0.0;
    }
    2.0 * a.intersection(b).count() as f64 / total as f64
}

/// Answer-matching normal form: case-fold, trim, strip terminal punctuation,
/// collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let folded = fold(s);
    folded
        .trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .trim_end()
        .to_string()
}
