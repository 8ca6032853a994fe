//! Word-level text similarity primitives.
//!
//! Everything here is a pure function over token sequences: tokenization,
//! word-level minimum edit distance, sentence BLEU and its inverse, ROUGE-L
//! and bag-of-tokens precision/recall/F1.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("BLEU candidate is empty")]
    EmptyCandidate,
    #[error("BLEU needs at least one reference")]
    NoReferences,
    #[error("max n-gram order must be at least 1")]
    ZeroOrder,
    #[error("inverse BLEU needs two non-empty texts")]
    EmptyText,
}

/// Normalization applied while tokenizing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Normalization {
    pub casefold: bool,
    pub strip_punctuation: bool,
}

impl Normalization {
    pub const NONE: Normalization = Normalization { casefold: false, strip_punctuation: false };
    pub const CASEFOLD: Normalization = Normalization { casefold: true, strip_punctuation: false };
    /// Casefold and strip punctuation: the setting used for scoring.
    pub const WORDS: Normalization = Normalization { casefold: true, strip_punctuation: true };
}

/// An ordered list of non-empty, whitespace-free word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSeq {
    tokens: Vec<String>,
    normalization: Normalization,
}

impl TokenSeq {
    /// Builds a sequence from pre-split tokens, rejecting empty tokens and
    /// tokens containing whitespace.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, InvalidToken>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for (position, token) in tokens.iter().enumerate() {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(InvalidToken { position, token: token.clone() });
            }
        }
        Ok(TokenSeq { tokens, normalization: Normalization::NONE })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens `start..end` joined with single spaces.
    pub fn join_range(&self, start: usize, end: usize) -> String {
        self.tokens[start..end].join(" ")
    }

    /// Re-normalizes every token, dropping tokens that become empty.
    pub fn normalized(&self, normalization: Normalization) -> TokenSeq {
        let tokens = self
            .tokens
            .iter()
            .filter_map(|t| normalize_token(t, normalization))
            .collect();
        TokenSeq { tokens, normalization }
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("token {position} ({token:?}) is empty or contains whitespace")]
pub struct InvalidToken {
    pub position: usize,
    pub token: String,
}

fn normalize_token(token: &str, normalization: Normalization) -> Option<String> {
    let token = if normalization.strip_punctuation {
        token.trim_matches(is_punctuation)
    } else {
        token
    };
    if token.is_empty() {
        return None;
    }
    Some(if normalization.casefold { token.to_lowercase() } else { token.to_owned() })
}

/// Punctuation test used for stripping. Covers ASCII punctuation plus the
/// common typographic quotes, dashes and brackets.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}' | '\u{00A1}' | '\u{00AB}' | '\u{00B7}'
                | '\u{00BB}' | '\u{00BF}' | '\u{3001}'..='\u{3003}' | '\u{300C}'..='\u{300F}'
        )
}

/// Splits on unicode whitespace and applies `normalization` per token.
pub fn tokenize(text: &str, normalization: Normalization) -> TokenSeq {
    let tokens = text
        .split_whitespace()
        .filter_map(|t| normalize_token(t, normalization))
        .collect();
    TokenSeq { tokens, normalization }
}

/// Word-level Levenshtein distance (unit insert/delete/substitute costs),
/// computed with the two-row Wagner-Fischer recurrence.
pub fn med(a: &TokenSeq, b: &TokenSeq) -> usize {
    edit_distance(a.tokens(), b.tokens())
}

/// Levenshtein distance over arbitrary comparable items.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_ngram: usize,
    /// Replaces any zero n-gram precision before the geometric mean.
    pub epsilon: f64,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_ngram: 4, epsilon: 0.01 }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence BLEU of `candidate` against `references`.
///
/// Clipped n-gram precisions are combined by geometric mean and scaled by
/// the brevity penalty `exp(1 - r/c)` when the candidate is not longer than
/// the closest reference length `r`. Orders above the candidate length have
/// no n-grams and are left out (effective order), so any non-empty sequence
/// scores exactly 1 against itself.
pub fn bleu(candidate: &TokenSeq, references: &[TokenSeq], config: &BleuConfig) -> Result<f64, MetricError> {
    if config.max_ngram == 0 {
        return Err(MetricError::ZeroOrder);
    }
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    if candidate.is_empty() {
        return Err(MetricError::EmptyCandidate);
    }
    let cand = candidate.tokens();
    let order = config.max_ngram.min(cand.len());

    let mut log_sum = 0.0;
    for n in 1..=order {
        let cand_counts = ngram_counts(cand, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for reference in references {
            for (gram, count) in ngram_counts(reference.tokens(), n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let clipped: usize = cand_counts
            .iter()
            .map(|(gram, &count)| count.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = cand.len() + 1 - n;
        let precision = if clipped == 0 { config.epsilon } else { clipped as f64 / total as f64 };
        log_sum += precision.ln();
    }
    let geometric = (log_sum / order as f64).exp();

    let c = cand.len();
    // Closest reference length; ties go to the shorter reference.
    let r = references
        .iter()
        .map(TokenSeq::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    let brevity = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok((brevity * geometric).clamp(0.0, 1.0))
}

/// Settings for the inverse-BLEU dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvBleuConfig {
    pub bleu: BleuConfig,
    /// BLEU is floored at this value before inversion.
    pub epsilon_floor: f64,
    pub normalization: Normalization,
}

impl Default for InvBleuConfig {
    fn default() -> Self {
        InvBleuConfig { bleu: BleuConfig::default(), epsilon_floor: 0.01, normalization: Normalization::WORDS }
    }
}

/// `1 / max(bleu(a, [b]), epsilon_floor)`, with `a` as the candidate.
pub fn inv_bleu(a: &str, b: &str, config: &InvBleuConfig) -> Result<f64, MetricError> {
    let a = tokenize(a, config.normalization);
    let b = tokenize(b, config.normalization);
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyText);
    }
    let score = bleu(&a, std::slice::from_ref(&b), &config.bleu)?;
    Ok(1.0 / score.max(config.epsilon_floor))
}

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub const ZERO: Prf = Prf { precision: 0.0, recall: 0.0, f1: 0.0 };

    pub fn new(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Prf { precision, recall, f1 }
    }

    fn from_overlap(overlap: usize, predicted: usize, gold: usize) -> Prf {
        if predicted == 0 || gold == 0 {
            return Prf::ZERO;
        }
        Prf::new(overlap as f64 / predicted as f64, overlap as f64 / gold as f64)
    }
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(curr[j]) };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// ROUGE-L: LCS-based precision against the candidate length and recall
/// against the reference length.
pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> Prf {
    let lcs = lcs_len(candidate.tokens(), reference.tokens());
    Prf::from_overlap(lcs, candidate.len(), reference.len())
}

/// Bag-of-tokens overlap using multiset intersection, so repeated tokens
/// only count as often as they occur on both sides.
pub fn token_prf(predicted: &TokenSeq, gold: &TokenSeq) -> Prf {
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in gold.tokens() {
        *gold_counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut overlap = 0;
    for t in predicted.tokens() {
        if let Some(count) = gold_counts.get_mut(t.as_str()) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    Prf::from_overlap(overlap, predicted.len(), gold.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(tokens: &[&str]) -> TokenSeq {
        TokenSeq::from_tokens(tokens.iter().copied()).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("", Normalization::WORDS).is_empty());
        assert_eq!(tokenize("The cat sat.", Normalization::WORDS).tokens(), ["the", "cat", "sat"]);
        let t = tokenize("Moderna’s lawsuits against Pfizer-BioNTech", Normalization::CASEFOLD);
        assert_eq!(t.len(), 4);
        assert_eq!(t.tokens()[0], "moderna’s");
    }

    #[test]
    fn stripping_drops_punctuation_only_tokens() {
        let t = tokenize("wait , what ?! “quoted”", Normalization::WORDS);
        assert_eq!(t.tokens(), ["wait", "what", "quoted"]);
        // inner punctuation survives
        assert_eq!(tokenize("covid-19.", Normalization::WORDS).tokens(), ["covid-19"]);
    }

    #[test]
    fn from_tokens_rejects_bad_tokens() {
        assert!(TokenSeq::from_tokens(["a", ""]).is_err());
        assert_eq!(TokenSeq::from_tokens(["a", "b c"]).unwrap_err().position, 1);
    }

    #[test]
    fn med_examples() {
        assert_eq!(med(&seq(&["the", "cat", "sat"]), &seq(&["the", "cat", "sat"])), 0);
        assert_eq!(med(&seq(&["a", "b", "c"]), &seq(&["a", "x", "c", "d"])), 2);
        assert_eq!(med(&seq(&[]), &seq(&["a", "b"])), 2);
    }

    #[test]
    fn bleu_identity_and_errors() {
        let x = seq(&["a", "quick", "brown", "fox", "jumps"]);
        assert_eq!(bleu(&x, std::slice::from_ref(&x), &BleuConfig::default()).unwrap(), 1.0);
        let single = seq(&["fox"]);
        assert_eq!(bleu(&single, std::slice::from_ref(&single), &BleuConfig::default()).unwrap(), 1.0);
        assert_eq!(bleu(&seq(&[]), std::slice::from_ref(&x), &BleuConfig::default()), Err(MetricError::EmptyCandidate));
        assert_eq!(bleu(&x, &[], &BleuConfig::default()), Err(MetricError::NoReferences));
        let zero = BleuConfig { max_ngram: 0, epsilon: 0.01 };
        assert_eq!(bleu(&x, std::slice::from_ref(&x), &zero), Err(MetricError::ZeroOrder));
    }

    #[test]
    fn bleu_clipped_unigram() {
        // clipped count of "the" is 1 of 3; c = 3 > r = 2 so no brevity penalty
        let cfg = BleuConfig { max_ngram: 1, epsilon: 0.01 };
        let got = bleu(&seq(&["the", "the", "the"]), &[seq(&["the", "cat"])], &cfg).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_disjoint_is_smoothed() {
        let cand = seq(&["w", "x", "y", "z"]);
        let reference = seq(&["a", "b", "c", "d", "e"]);
        let got = bleu(&cand, &[reference], &BleuConfig::default()).unwrap();
        let bp = (1.0f64 - 5.0 / 4.0).exp();
        assert!((got - bp * 0.01).abs() < 1e-12);
    }

    #[test]
    fn inv_bleu_examples() {
        let cfg = InvBleuConfig::default();
        assert_eq!(inv_bleu("the cat sat", "the cat sat", &cfg).unwrap(), 1.0);
        let d = inv_bleu("alpha beta gamma", "one two three four", &cfg).unwrap();
        assert!(d <= 100.0 && d > 1.0);
        assert_eq!(d, 100.0);
        assert_eq!(inv_bleu("", "x", &cfg), Err(MetricError::EmptyText));
        assert_eq!(inv_bleu("x", "...", &cfg), Err(MetricError::EmptyText));
    }

    #[test]
    fn rouge_examples() {
        let a = seq(&["a", "b", "c", "d"]);
        assert_eq!(rouge_l(&a, &a), Prf::new(1.0, 1.0));
        let got = rouge_l(&a, &seq(&["a", "c", "d", "e"]));
        assert_eq!((got.precision, got.recall), (0.75, 0.75));
        assert!((got.f1 - 0.75).abs() < 1e-12);
        assert_eq!(rouge_l(&seq(&[]), &a), Prf::ZERO);
    }

    #[test]
    fn token_prf_examples() {
        let got = token_prf(&seq(&["before", "the", "pandemic"]), &seq(&["before", "pandemic"]));
        assert!((got.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(got.recall, 1.0);
        assert!((got.f1 - 0.8).abs() < 1e-12);
        let bag = seq(&["x", "y", "x"]);
        assert_eq!(token_prf(&bag, &seq(&["x", "x", "y"])), Prf::new(1.0, 1.0));
        assert_eq!(token_prf(&bag, &seq(&["z"])), Prf::ZERO);
        // repeats beyond the gold count are not rewarded
        let padded = token_prf(&seq(&["x", "x", "x", "x"]), &seq(&["x", "y"]));
        assert_eq!(padded.precision, 0.25);
    }

    #[test]
    fn prf_zero_rule() {
        assert_eq!(Prf::new(0.0, 0.0).f1, 0.0);
    }
}
