//! Archived tweet corpus with an inverted term index.
//!
//! The corpus stands in for the platform search API: queries return matching
//! tweets newest first, limited to a recency horizon and a per-query cap.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use tracing::warn;

use crate::error::{CorpusError, RejectReason, SearchError};
use crate::model::{
    validate_record, Epoch, RawRecord, TweetId, TweetRecord, UserRef, MAX_TWEETS_PER_TERM,
};
use crate::text::{tokenize, TermPattern};

/// Number of tweets sampled for keyword rating and suggestions.
pub const RECENT_SAMPLE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub epoch: Option<Epoch>,
    /// Loading fails when strictly more than this fraction of lines is rejected.
    pub max_reject_fraction: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            epoch: None,
            max_reject_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub accepted: usize,
    /// `(1-based line number, reason)`
    pub rejected: Vec<(usize, RejectReason)>,
}

impl LoadReport {
    pub fn by_reason(&self) -> BTreeMap<RejectReason, usize> {
        let mut out = BTreeMap::new();
        for (_, r) in &self.rejected {
            *out.entry(*r).or_default() += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub horizon_days: f64,
    pub now: DateTime<Utc>,
}

impl SearchWindow {
    pub const DEFAULT_HORIZON_DAYS: f64 = 9.0;

    pub fn new(horizon_days: f64, now: DateTime<Utc>) -> Result<Self, SearchError> {
        if !(horizon_days > 0.0 && horizon_days.is_finite()) {
            return Err(SearchError::Horizon(horizon_days.to_string()));
        }
        Ok(Self { horizon_days, now })
    }

    /// Default horizon with the clock set to the newest tweet of the corpus.
    pub fn for_corpus(corpus: &Corpus) -> Self {
        Self {
            horizon_days: Self::DEFAULT_HORIZON_DAYS,
            now: corpus.epoch().map(|e| e.end).unwrap_or_else(Utc::now),
        }
    }

    pub fn earliest(&self) -> DateTime<Utc> {
        self.now - Duration::seconds((self.horizon_days * 86_400.0).round() as i64)
    }

    pub fn admits(&self, t: &DateTime<Utc>) -> bool {
        *t >= self.earliest()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    tokens: Vec<Vec<String>>,
    by_id: HashMap<TweetId, usize>,
    /// Token -> record positions, newest first (ties: higher id first).
    term_index: HashMap<String, Vec<u32>>,
    recency: Vec<u32>,
    by_screen_name: HashMap<String, usize>,
    epoch: Option<Epoch>,
}

impl Corpus {
    /// Build from validated records. Later duplicates of an id are dropped.
    pub fn from_records(records: impl IntoIterator<Item = TweetRecord>) -> (Self, Vec<TweetId>) {
        let mut kept = Vec::new();
        let mut by_id = HashMap::new();
        let mut duplicates = Vec::new();
        for rec in records {
            if by_id.contains_key(&rec.tweet_id) {
                duplicates.push(rec.tweet_id);
                continue;
            }
            by_id.insert(rec.tweet_id, kept.len());
            kept.push(rec);
        }
        (Self::index(kept, by_id), duplicates)
    }

    fn index(records: Vec<TweetRecord>, by_id: HashMap<TweetId, usize>) -> Self {
        let tokens: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.text)).collect();

        let mut recency: Vec<u32> = (0..records.len() as u32).collect();
        recency.sort_by(|&a, &b| {
            let (ra, rb) = (&records[a as usize], &records[b as usize]);
            rb.created_at
                .cmp(&ra.created_at)
                .then(rb.tweet_id.cmp(&ra.tweet_id))
        });

        let mut term_index: HashMap<String, Vec<u32>> = HashMap::new();
        for &pos in &recency {
            let mut toks: Vec<&String> = tokens[pos as usize].iter().collect();
            toks.sort_unstable();
            toks.dedup();
            for t in toks {
                term_index.entry(t.clone()).or_default().push(pos);
            }
        }

        let mut by_screen_name = HashMap::new();
        // newest profile snapshot wins
        for &pos in recency.iter().rev() {
            let name = records[pos as usize].author.screen_name.to_lowercase();
            by_screen_name.insert(name, pos as usize);
        }

        let epoch = match (
            records.iter().map(|r| r.created_at).min(),
            records.iter().map(|r| r.created_at).max(),
        ) {
            (Some(start), Some(end)) => Some(Epoch { start, end }),
            _ => None,
        };

        Self {
            records,
            tokens,
            by_id,
            term_index,
            recency,
            by_screen_name,
            epoch,
        }
    }

    pub fn from_reader(
        reader: impl Read,
        opts: &LoadOptions,
    ) -> Result<(Self, LoadReport), CorpusError> {
        let mut report = LoadReport::default();
        let mut records = Vec::new();
        let mut by_id = HashMap::new();
        let mut total = 0usize;
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = n + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                    total += 1;
                    report.rejected.push((line_no, RejectReason::Malformed));
                    continue;
                }
                Err(e) => {
                    return Err(CorpusError::Io {
                        path: Default::default(),
                        source: e,
                    });
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            total += 1;
            let outcome = serde_json::from_str::<RawRecord>(&line)
                .map_err(|_| RejectReason::Malformed)
                .and_then(|raw| validate_record(&raw, opts.epoch.as_ref()))
                .and_then(|rec| {
                    if by_id.contains_key(&rec.tweet_id) {
                        Err(RejectReason::DuplicateId)
                    } else {
                        Ok(rec)
                    }
                });
            match outcome {
                Ok(rec) => {
                    by_id.insert(rec.tweet_id, records.len());
                    records.push(rec);
                }
                Err(reason) => {
                    warn!(line = line_no, %reason, "corpus record rejected");
                    report.rejected.push((line_no, reason));
                }
            }
        }
        report.accepted = records.len();
        if total > 0 && report.rejected.len() as f64 > opts.max_reject_fraction * total as f64 {
            return Err(CorpusError::Unusable {
                rejected: report.rejected.len(),
                total,
            });
        }
        Ok((Self::index(records, by_id), report))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn get(&self, id: TweetId) -> Option<&TweetRecord> {
        self.by_id.get(&id).map(|&i| &self.records[i])
    }

    pub fn tokens_of(&self, id: TweetId) -> Option<&[String]> {
        self.by_id.get(&id).map(|&i| self.tokens[i].as_slice())
    }

    pub fn epoch(&self) -> Option<Epoch> {
        self.epoch
    }

    /// All records, newest first.
    pub fn newest_first(&self) -> impl Iterator<Item = &TweetRecord> {
        self.recency.iter().map(move |&p| &self.records[p as usize])
    }

    /// Every record matching `pattern`, newest first.
    pub(crate) fn matching(&self, pattern: TermPattern) -> impl Iterator<Item = &TweetRecord> + '_ {
        // scan the rarest token's postings, verify the full pattern on each candidate
        let postings: &[u32] = pattern
            .tokens()
            .iter()
            .map(|t| self.term_index.get(t).map(Vec::as_slice).unwrap_or(&[]))
            .min_by_key(|p| p.len())
            .unwrap_or(&[]);
        let verify = pattern.is_phrase();
        postings.iter().filter_map(move |&p| {
            let p = p as usize;
            (!verify || pattern.matches(&self.tokens[p])).then(|| &self.records[p])
        })
    }

    /// Up to `limit` records containing `query`, newest first, restricted to the window.
    pub fn search(
        &self,
        query: &str,
        window: &SearchWindow,
        limit: usize,
    ) -> Result<Vec<&TweetRecord>, SearchError> {
        let max = MAX_TWEETS_PER_TERM as usize;
        if limit == 0 || limit > max {
            return Err(SearchError::Limit { got: limit, max });
        }
        let pattern = TermPattern::new(query).ok_or(SearchError::EmptyQuery)?;
        let earliest = window.earliest();
        Ok(self
            .matching(pattern)
            // postings are newest first, so everything after the first too-old hit is too old
            .take_while(|r| r.created_at >= earliest)
            .take(limit)
            .collect())
    }

    /// The newest `count` records containing `term`, ignoring the horizon.
    pub fn fetch_recent(&self, term: &str, count: usize) -> Vec<&TweetRecord> {
        match TermPattern::new(term) {
            Some(p) => self.matching(p).take(count).collect(),
            None => Vec::new(),
        }
    }

    /// The author of the tweet a retweet points at: looked up by id, or from
    /// the `RT @name:` prefix when the original is not archived.
    pub fn retweeted_author(&self, retweet: &TweetRecord) -> Option<&UserRef> {
        let original = retweet.retweet_of?;
        if let Some(rec) = self.get(original) {
            return Some(&rec.author);
        }
        let rest = retweet.text.trim_start().strip_prefix("RT @")?;
        let name: String = rest
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        self.by_screen_name
            .get(&name.to_lowercase())
            .map(|&p| &self.records[p].author)
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Corpus, LoadReport), CorpusError> {
    load_corpus_with(path, &LoadOptions::default())
}

pub fn load_corpus_with(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<(Corpus, LoadReport), CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    Corpus::from_reader(file, opts).map_err(|e| match e {
        CorpusError::Io { source, .. } => io_err(source),
        other => other,
    })
}
