//! Lexicon-based detection of tweets that doubt or refute a story.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{InvestigationConfig, TweetId, TweetRecord};
use crate::text::{normalize_term, tokenize, TermPattern};

const DEFAULT_LEXICON: &str = include_str!("../data/negation.txt");

/// Parse the lexicon file format: one term or phrase per line, `#` comments.
pub fn parse_lexicon(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(normalize_term)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationLexicon {
    pub base_terms: BTreeSet<String>,
    pub added: BTreeSet<String>,
    pub removed: BTreeSet<String>,
}

impl Default for NegationLexicon {
    fn default() -> Self {
        Self {
            base_terms: parse_lexicon(DEFAULT_LEXICON),
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
        }
    }
}

impl NegationLexicon {
    pub fn from_base(base_terms: BTreeSet<String>) -> Self {
        Self {
            base_terms,
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::from_base(parse_lexicon(&std::fs::read_to_string(
            path,
        )?)))
    }

    /// Apply a story's additions and removals; fails if nothing would remain.
    pub fn customized<A, R>(&self, add: A, remove: R) -> Result<Self, ConfigError>
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut out = self.clone();
        out.added
            .extend(add.into_iter().filter_map(|t| normalize_term(t.as_ref())));
        out.removed.extend(
            remove
                .into_iter()
                .filter_map(|t| normalize_term(t.as_ref())),
        );
        if out.effective().is_empty() {
            return Err(ConfigError::EmptyLexicon);
        }
        Ok(out)
    }

    pub fn for_config(&self, config: &InvestigationConfig) -> Result<Self, ConfigError> {
        self.customized(&config.negation_add, &config.negation_remove)
    }

    /// `(base ∪ added) \ removed`
    pub fn effective(&self) -> BTreeSet<String> {
        self.base_terms
            .union(&self.added)
            .filter(|t| !self.removed.contains(*t))
            .cloned()
            .collect()
    }

    pub fn matcher(&self) -> NegationMatcher {
        NegationMatcher {
            patterns: self
                .effective()
                .iter()
                .filter_map(|t| TermPattern::new(t))
                .collect(),
        }
    }
}

/// Compiled effective lexicon.
#[derive(Debug, Clone)]
pub struct NegationMatcher {
    patterns: Vec<TermPattern>,
}

impl NegationMatcher {
    pub fn matches_tokens(&self, tokens: &[String]) -> bool {
        self.patterns.iter().any(|p| p.matches(tokens))
    }

    pub fn is_negation(&self, tweet: &TweetRecord) -> bool {
        self.matches_tokens(&tokenize(&tweet.text))
    }
}

pub fn is_negation(tweet: &TweetRecord, lex: &NegationLexicon) -> bool {
    lex.matcher().is_negation(tweet)
}

/// Negating and non-negating ids, each in the input order.
pub fn split_story(
    relevant: &[&TweetRecord],
    lex: &NegationLexicon,
) -> (Vec<TweetId>, Vec<TweetId>) {
    let matcher = lex.matcher();
    let (neg, non): (Vec<&&TweetRecord>, Vec<&&TweetRecord>) =
        relevant.iter().partition(|r| matcher.is_negation(r));
    (
        neg.into_iter().map(|r| r.tweet_id).collect(),
        non.into_iter().map(|r| r.tweet_id).collect(),
    )
}
