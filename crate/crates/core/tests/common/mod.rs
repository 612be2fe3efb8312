#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, TimeZone, Utc};

use rumortrace::corpus::SearchWindow;
use rumortrace::text::tokenize;
use rumortrace::{Corpus, InvestigationConfig, KeywordRole, RequiredMode, TweetId};

pub const VOCAB: &[&str] = &[
    "avión",
    "mar",
    "gran",
    "canaria",
    "remolcador",
    "foto",
    "playa",
    "barco",
    "noticia",
    "rescate",
    "hoy",
    "costa",
];

pub fn day(secs: i64) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 3, 27, 0, 0, 0).unwrap() + Duration::seconds(secs)
}

pub fn contains_seq(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn words(term: &str) -> Vec<String> {
    tokenize(term.trim_matches('"'))
}

/// Full scan of the corpus applying the filter rules directly.
pub fn oracle_relevant(
    corpus: &Corpus,
    config: &InvestigationConfig,
    window: &SearchWindow,
) -> BTreeSet<TweetId> {
    let role = |r: KeywordRole| -> Vec<Vec<String>> {
        config
            .keywords
            .iter()
            .filter(|k| k.role == r)
            .map(|k| words(&k.term))
            .collect()
    };
    let (required, optional, excluded) = (
        role(KeywordRole::Required),
        role(KeywordRole::Optional),
        role(KeywordRole::Excluded),
    );
    let queries: Vec<Vec<String>> = if config.search_terms.is_empty() {
        required.iter().chain(&optional).cloned().collect()
    } else {
        config.search_terms.iter().map(|t| words(t)).collect()
    };
    corpus
        .records()
        .iter()
        .filter(|r| {
            let toks = tokenize(&r.text);
            let has = |p: &Vec<String>| contains_seq(&toks, p);
            r.created_at >= window.earliest()
                && queries.iter().any(has)
                && !excluded.iter().any(has)
                && (required.is_empty()
                    || match config.required_mode {
                        RequiredMode::All => required.iter().all(has),
                        RequiredMode::AtLeastOne => required.iter().any(has),
                    })
                && optional.iter().filter(|p| has(p)).count() >= config.optional_threshold as usize
                && config
                    .time_window
                    .is_none_or(|w| w.0 <= r.created_at && r.created_at <= w.1)
        })
        .map(|r| r.tweet_id)
        .collect()
}

/// Sort descending and walk until the i-th largest count drops below i.
pub fn oracle_h(counts: &[u64]) -> u64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0;
    for (i, &c) in sorted.iter().enumerate() {
        if c > i as u64 {
            h = i as u64 + 1;
        } else {
            break;
        }
    }
    h
}
