use std::path::PathBuf;

use thiserror::Error;

/// Why a corpus line was not turned into a [`crate::TweetRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Error)]
pub enum RejectReason {
    #[error("malformed-line")]
    Malformed,
    #[error("missing-id")]
    MissingId,
    #[error("invalid-id")]
    InvalidId,
    #[error("missing-timestamp")]
    MissingTimestamp,
    #[error("invalid-timestamp")]
    InvalidTimestamp,
    #[error("missing-text")]
    MissingText,
    #[error("missing-author")]
    MissingAuthor,
    #[error("empty-screen-name")]
    EmptyScreenName,
    #[error("negative-followers")]
    NegativeFollowers,
    #[error("negative-count")]
    NegativeCount,
    #[error("self-retweet")]
    SelfRetweet,
    #[error("outside-epoch")]
    OutsideEpoch,
    #[error("duplicate-id")]
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("keyword term is empty")]
    EmptyKeyword,
    #[error("keyword {0:?} is listed more than once")]
    DuplicateKeyword(String),
    #[error("search term {0:?} is empty")]
    EmptySearchTerm(String),
    #[error("{count} search terms exceed the limit of {max}")]
    TooManySearchTerms { count: usize, max: usize },
    #[error("optional threshold {threshold} exceeds the {optional} optional keywords")]
    ThresholdTooHigh { threshold: u32, optional: usize },
    #[error("time window start must precede its end")]
    InvertedTimeWindow,
    #[error("max_tweets_per_term must be between 1 and {max}, got {got}")]
    TweetCap { got: u32, max: u32 },
    #[error("negation lexicon would be empty")]
    EmptyLexicon,
    #[error("investigative tweet cannot be changed by a refinement")]
    InvestigativeTweetChanged,
    #[error("malformed config: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus unusable: {rejected} of {total} records rejected")]
    Unusable { rejected: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("empty query")]
    EmptyQuery,
    #[error("limit must be between 1 and {max}, got {got}")]
    Limit { got: usize, max: usize },
    #[error("search horizon must be a positive number of days, got {0}")]
    Horizon(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("empty story")]
    EmptyStory,
    #[error("no timeline bin starts at {0}")]
    UnknownBin(String),
    #[error("tweet {0} is not in the corpus")]
    UnknownTweet(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
