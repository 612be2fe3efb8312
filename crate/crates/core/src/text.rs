//! Tokenization, phrase matching and term-frequency vectors.
//!
//! One tokenizer backs search, relevancy filtering, negation detection and
//! the similarity measures, so a term that "matches" in one place matches
//! everywhere.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::numeric::Scalar;

fn is_url_chunk(chunk: &str) -> bool {
    let lower = chunk.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = lower.get(..8).unwrap_or(lower).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '#' || c == '@'
}

/// Lowercased word tokens. URLs are dropped; punctuation other than `#`, `@`
/// and `_` separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        if is_url_chunk(chunk) {
            continue;
        }
        for piece in chunk.split(|c: char| !is_token_char(c)) {
            // a bare "#" or "@" carries no word
            if piece.chars().any(|c| c.is_alphanumeric() || c == '_') {
                tokens.push(piece.to_lowercase());
            }
        }
    }
    tokens
}

/// A search term or keyword compiled to its token sequence. Quoted phrases
/// (`"gran canaria"`) and bare multi-word terms behave the same way: they
/// match as a contiguous run of tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermPattern {
    tokens: Vec<String>,
}

impl TermPattern {
    pub fn new(term: &str) -> Option<Self> {
        let trimmed = term.trim().trim_matches('"');
        let tokens = tokenize(trimmed);
        (!tokens.is_empty()).then_some(Self { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_phrase(&self) -> bool {
        self.tokens.len() > 1
    }

    pub fn matches(&self, haystack: &[String]) -> bool {
        let n = self.tokens.len();
        if n == 1 {
            return haystack.iter().any(|t| *t == self.tokens[0]);
        }
        haystack.windows(n).any(|w| w == self.tokens.as_slice())
    }
}

/// Normalized display form of a term: lowercase tokens joined by one space.
pub fn normalize_term(term: &str) -> Option<String> {
    TermPattern::new(term).map(|p| p.tokens.join(" "))
}

/// Tokens used for similarity: mentions and the retweet marker are removed,
/// hashtags are kept.
pub fn similarity_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !t.starts_with('@') && t != "rt")
        .collect()
}

/// Raw term-frequency vector, stored sorted by term for merge-join products.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(String, u32)>,
    norm_sq: u64,
}

impl TermVector {
    pub fn from_text(text: &str) -> Self {
        Self::from_tokens(similarity_tokens(text))
    }

    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t).or_default() += 1;
        }
        let norm_sq = counts.values().map(|&c| u64::from(c) * u64::from(c)).sum();
        Self {
            entries: counts.into_iter().collect(),
            norm_sq,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq == 0
    }

    pub fn dot(&self, other: &TermVector) -> u64 {
        let (mut i, mut j, mut acc) = (0, 0, 0u64);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    acc += u64::from(self.entries[i].1) * u64::from(other.entries[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Cosine similarity in [0, 1]; zero vectors are orthogonal to everything.
    pub fn cosine<S: Scalar>(&self, other: &TermVector) -> S {
        if self.is_zero() || other.is_zero() {
            return S::zero();
        }
        let dot = self.dot(other);
        if dot == 0 {
            return S::zero();
        }
        // identical vectors: avoid sqrt rounding so self-similarity is exactly 1
        if self == other {
            return S::one();
        }
        let denom = (S::from_count(self.norm_sq) * S::from_count(other.norm_sq)).sqrt();
        (S::from_count(dot) / denom).min(S::one())
    }
}
