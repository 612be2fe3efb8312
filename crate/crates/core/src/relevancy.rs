//! User-steered relevancy filter, keyword rating and keyword suggestions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SearchWindow, RECENT_SAMPLE};
use crate::model::{
    InvestigationConfig, KeywordRole, RequiredMode, TimeWindow, TweetId, TweetRecord,
};
use crate::numeric::Scalar;
use crate::text::{normalize_term, similarity_tokens, tokenize, TermPattern, TermVector};

/// A config compiled to token patterns, ready to test many tweets.
#[derive(Debug, Clone)]
pub struct RelevancyFilter {
    required: Vec<TermPattern>,
    optional: Vec<TermPattern>,
    excluded: Vec<TermPattern>,
    mode: RequiredMode,
    threshold: usize,
    window: Option<TimeWindow>,
}

impl RelevancyFilter {
    pub fn new(config: &InvestigationConfig) -> Self {
        let compile = |role| -> Vec<TermPattern> {
            config
                .keyword_terms(role)
                .filter_map(TermPattern::new)
                .collect()
        };
        Self {
            required: compile(KeywordRole::Required),
            optional: compile(KeywordRole::Optional),
            excluded: compile(KeywordRole::Excluded),
            mode: config.required_mode,
            threshold: config.optional_threshold as usize,
            window: config.time_window,
        }
    }

    pub fn accepts(&self, tokens: &[String], created_at: &DateTime<Utc>) -> bool {
        if self.excluded.iter().any(|p| p.matches(tokens)) {
            return false;
        }
        let required_ok = self.required.is_empty()
            || match self.mode {
                RequiredMode::All => self.required.iter().all(|p| p.matches(tokens)),
                RequiredMode::AtLeastOne => self.required.iter().any(|p| p.matches(tokens)),
            };
        if !required_ok {
            return false;
        }
        if self.threshold > 0 {
            let hits = self.optional.iter().filter(|p| p.matches(tokens)).count();
            if hits < self.threshold {
                return false;
            }
        }
        self.window.is_none_or(|w| w.contains(created_at))
    }
}

pub fn is_relevant(tweet: &TweetRecord, config: &InvestigationConfig) -> bool {
    RelevancyFilter::new(config).accepts(&tokenize(&tweet.text), &tweet.created_at)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryStatus {
    Ok,
    EmptyStory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantSet {
    /// Ascending by `created_at`, ties by id.
    pub tweet_ids: Vec<TweetId>,
    pub config_snapshot: InvestigationConfig,
    pub originals_count: usize,
    pub retweets_count: usize,
    pub status: StoryStatus,
}

impl RelevantSet {
    pub fn is_empty(&self) -> bool {
        self.tweet_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tweet_ids.len()
    }

    /// Member records in set order. Ids missing from `corpus` are skipped.
    pub fn records<'c>(&self, corpus: &'c Corpus) -> Vec<&'c TweetRecord> {
        self.tweet_ids
            .iter()
            .filter_map(|&id| corpus.get(id))
            .collect()
    }
}

/// The queries sent to search: the configured search terms, or the required
/// and optional keywords when no search term is configured.
pub fn search_queries(config: &InvestigationConfig) -> Vec<String> {
    if !config.search_terms.is_empty() {
        return config.search_terms.clone();
    }
    config
        .keywords
        .iter()
        .filter(|k| k.role != KeywordRole::Excluded)
        .map(|k| k.term.clone())
        .collect()
}

pub fn build_relevant_set(
    corpus: &Corpus,
    config: &InvestigationConfig,
    window: &SearchWindow,
) -> RelevantSet {
    let filter = RelevancyFilter::new(config);
    let limit = config.max_tweets_per_term as usize;
    let mut seen = HashSet::new();
    let mut members: Vec<&TweetRecord> = Vec::new();
    for query in search_queries(config) {
        let Ok(hits) = corpus.search(&query, window, limit) else {
            continue;
        };
        for rec in hits {
            if !seen.insert(rec.tweet_id) {
                continue;
            }
            let tokens = corpus.tokens_of(rec.tweet_id).unwrap_or(&[]);
            if filter.accepts(tokens, &rec.created_at) {
                members.push(rec);
            }
        }
    }
    members.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then(a.tweet_id.cmp(&b.tweet_id))
    });
    let retweets_count = members.iter().filter(|r| r.is_retweet()).count();
    RelevantSet {
        originals_count: members.len() - retweets_count,
        retweets_count,
        status: if members.is_empty() {
            StoryStatus::EmptyStory
        } else {
            StoryStatus::Ok
        },
        tweet_ids: members.iter().map(|r| r.tweet_id).collect(),
        config_snapshot: config.clone(),
    }
}

/// Weights combining cohesion and affinity into one rating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingWeights<S> {
    pub cohesion: S,
    pub affinity: S,
}

impl<S: Scalar> Default for RatingWeights<S> {
    fn default() -> Self {
        Self {
            cohesion: S::half(),
            affinity: S::half(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordRating<S> {
    pub term: String,
    pub sample_size: usize,
    pub cohesion: S,
    pub affinity: S,
    pub rating: S,
}

/// Rate a candidate search term by how alike its recent tweets are to each
/// other (cohesion) and to the investigative tweet (affinity).
pub fn rate_keyword<S: Scalar>(
    corpus: &Corpus,
    term: &str,
    investigative: &TweetRecord,
    weights: RatingWeights<S>,
) -> KeywordRating<S> {
    let sample: Vec<TermVector> = corpus
        .fetch_recent(term, RECENT_SAMPLE)
        .into_iter()
        .map(|r| TermVector::from_text(&r.text))
        .collect();
    let (cohesion, affinity) =
        cohesion_affinity(&sample, &TermVector::from_text(&investigative.text));
    let rating = if sample.is_empty() {
        S::zero()
    } else {
        weights.cohesion * cohesion + weights.affinity * affinity
    };
    KeywordRating {
        term: term.trim().to_string(),
        sample_size: sample.len(),
        cohesion,
        affinity,
        rating,
    }
}

fn cohesion_affinity<S: Scalar>(sample: &[TermVector], anchor: &TermVector) -> (S, S) {
    let n = sample.len();
    if n == 0 {
        return (S::zero(), S::zero());
    }
    let affinity =
        sample.iter().map(|v| v.cosine::<S>(anchor)).sum::<S>() / S::from_count(n as u64);
    // a lone tweet is trivially consistent with itself
    let cohesion = if n == 1 {
        S::one()
    } else {
        let mut total = S::zero();
        for i in 0..n {
            for j in i + 1..n {
                total = total + sample[i].cosine::<S>(&sample[j]);
            }
        }
        total / S::from_count((n * (n - 1) / 2) as u64)
    };
    (cohesion, affinity)
}

fn stopword_list(raw: &'static str) -> BTreeSet<&'static str> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Shipped stopword lists keyed by language tag.
pub fn stopwords(lang: Option<&str>) -> &'static BTreeSet<&'static str> {
    static EN: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    static ES: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    static ALL: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    let en = || EN.get_or_init(|| stopword_list(include_str!("../data/stopwords_en.txt")));
    let es = || ES.get_or_init(|| stopword_list(include_str!("../data/stopwords_es.txt")));
    match lang {
        Some("en") => en(),
        Some("es") => es(),
        _ => ALL.get_or_init(|| en().union(es()).copied().collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionPool {
    Unigram,
    Bigram,
    Hashtag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSuggestion {
    pub term: String,
    pub pool: SuggestionPool,
    pub document_frequency: usize,
}

fn candidates(tweet: &TweetRecord) -> BTreeMap<String, SuggestionPool> {
    let stop = stopwords(tweet.lang.as_deref());
    let tokens = similarity_tokens(&tweet.text);
    let mut out = BTreeMap::new();
    let plain = |t: &str| !t.starts_with('#') && !stop.contains(t);
    for t in &tokens {
        if t.starts_with('#') {
            out.insert(t.clone(), SuggestionPool::Hashtag);
        } else if plain(t) {
            out.insert(t.clone(), SuggestionPool::Unigram);
        }
    }
    for w in tokens.windows(2) {
        if plain(&w[0]) && plain(&w[1]) {
            out.insert(format!("{} {}", w[0], w[1]), SuggestionPool::Bigram);
        }
    }
    out
}

/// The 100 most recent tweets matching any current query. With no query yet,
/// the most recent tweets sharing a content word with the investigative tweet.
fn suggestion_sample<'c>(
    corpus: &'c Corpus,
    investigative: &TweetRecord,
    config: &InvestigationConfig,
) -> Vec<&'c TweetRecord> {
    let patterns: Vec<TermPattern> = search_queries(config)
        .iter()
        .filter_map(|q| TermPattern::new(q))
        .collect();
    let patterns = if patterns.is_empty() {
        let stop = stopwords(investigative.lang.as_deref());
        let mut words: Vec<String> = similarity_tokens(&investigative.text)
            .into_iter()
            .filter(|t| !stop.contains(t.as_str()))
            .collect();
        words.sort();
        words.dedup();
        words.iter().filter_map(|w| TermPattern::new(w)).collect()
    } else {
        patterns
    };
    corpus
        .newest_first()
        .filter(|r| {
            let tokens = corpus.tokens_of(r.tweet_id).unwrap_or(&[]);
            patterns.iter().any(|p| p.matches(tokens))
        })
        .take(RECENT_SAMPLE)
        .collect()
}

/// Top-`k` new search terms by document frequency. Candidates overlapping a
/// term already in the config are skipped. Ties prefer bigrams over single
/// tokens, then lexicographic order.
pub fn suggest_keywords(
    corpus: &Corpus,
    investigative: &TweetRecord,
    config: &InvestigationConfig,
    k: usize,
) -> Vec<KeywordSuggestion> {
    let existing: HashSet<String> = config
        .search_terms
        .iter()
        .map(String::as_str)
        .chain(config.keywords.iter().map(|kw| kw.term.as_str()))
        .filter_map(normalize_term)
        .collect();

    let mut df: BTreeMap<String, (SuggestionPool, usize)> = BTreeMap::new();
    for rec in suggestion_sample(corpus, investigative, config) {
        for (term, pool) in candidates(rec) {
            df.entry(term).or_insert((pool, 0)).1 += 1;
        }
    }
    let mut ranked: Vec<KeywordSuggestion> = df
        .into_iter()
        .filter(|(term, _)| {
            !term.split(' ').any(|t| existing.contains(t)) && !existing.contains(term)
        })
        .map(|(term, (pool, n))| KeywordSuggestion {
            term,
            pool,
            document_frequency: n,
        })
        .collect();
    let width = |s: &KeywordSuggestion| usize::from(s.pool == SuggestionPool::Bigram);
    ranked.sort_by(|a, b| {
        b.document_frequency
            .cmp(&a.document_frequency)
            .then(width(b).cmp(&width(a)))
            .then(a.term.cmp(&b.term))
    });
    ranked.truncate(k);
    ranked
}
