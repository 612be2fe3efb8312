use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::{TweetId, TweetRecord, UserId};

const TRACKING_KEYS: &[&str] = &["fbclid", "gclid", "mc_cid", "mc_eid", "igshid"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub canonical_url: String,
    pub tweet_count: u64,
    pub distinct_user_count: u64,
    pub tweet_ids: Vec<TweetId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkBibliography {
    pub entries: Vec<LinkEntry>,
}

/// Lowercase scheme and host, drop the fragment and tracking parameters.
/// Strings that do not parse as absolute URLs are only trimmed.
pub fn canonicalize_url(raw: &str) -> String {
    let raw = raw.trim();
    let Ok(mut url) = Url::parse(raw) else {
        return raw.to_string();
    };
    url.set_fragment(None);
    let kept: Vec<(String, String)> = url
        .query_pairs()
        .filter(|(k, _)| {
            let k = k.to_ascii_lowercase();
            !k.starts_with("utm_") && !TRACKING_KEYS.contains(&k.as_str())
        })
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    if kept.is_empty() {
        url.set_query(None);
    } else {
        url.query_pairs_mut().clear().extend_pairs(kept);
    }
    url.to_string()
}

/// Links cited in the story, counted per tweet (a URL repeated inside one
/// tweet counts once) and per distinct author.
pub fn build_link_bibliography(relevant: &[&TweetRecord]) -> LinkBibliography {
    let mut groups: BTreeMap<String, (BTreeSet<TweetId>, BTreeSet<UserId>)> = BTreeMap::new();
    for r in relevant {
        for raw in &r.urls {
            let entry = groups.entry(canonicalize_url(raw)).or_default();
            entry.0.insert(r.tweet_id);
            entry.1.insert(r.author.user_id);
        }
    }
    let mut entries: Vec<LinkEntry> = groups
        .into_iter()
        .filter(|(url, _)| !url.is_empty())
        .map(|(canonical_url, (tweets, users))| LinkEntry {
            canonical_url,
            tweet_count: tweets.len() as u64,
            distinct_user_count: users.len() as u64,
            tweet_ids: tweets.into_iter().collect(),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.tweet_count
            .cmp(&a.tweet_count)
            .then(b.distinct_user_count.cmp(&a.distinct_user_count))
            .then_with(|| a.canonical_url.cmp(&b.canonical_url))
    });
    LinkBibliography { entries }
}
