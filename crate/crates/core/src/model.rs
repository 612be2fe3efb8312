//! Canonical record and configuration types.
//!
//! Everything here is an immutable value once validated. The corpus wire
//! format ([`RawRecord`]) is deliberately permissive so that
//! [`validate_record`] can report precise rejection reasons.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, SubsecRound, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ConfigError, RejectReason};
use crate::text::normalize_term;

/// Width of one analysis bin, in seconds.
pub const BIN_WIDTH_SECS: i64 = 600;

/// Platform search cap per keyword.
pub const MAX_TWEETS_PER_TERM: u32 = 18_000;

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.trim().parse().map($name)
            }
        }

        // Serialized as strings: identifiers exceed 2^53 and must survive JSON consumers.
        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let v = IdRepr::deserialize(d)?;
                v.to_u64()
                    .map($name)
                    .ok_or_else(|| serde::de::Error::custom(concat!("invalid ", stringify!($name))))
            }
        }
    };
}

id_newtype!(TweetId);
id_newtype!(UserId);

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum IdRepr {
    Int(u64),
    Signed(i64),
    Str(String),
}

impl IdRepr {
    fn to_u64(&self) -> Option<u64> {
        match self {
            IdRepr::Int(n) => Some(*n),
            IdRepr::Signed(n) => u64::try_from(*n).ok(),
            IdRepr::Str(s) => s.trim().parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRef {
    pub user_id: UserId,
    pub screen_name: String,
    pub followers_count: u64,
    pub verified: bool,
    pub description: String,
    pub account_created_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: TweetId,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub author: UserRef,
    pub retweet_count: u64,
    pub retweet_of: Option<TweetId>,
    pub urls: Vec<String>,
    pub hashtags: Vec<String>,
    pub lang: Option<String>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }

    pub fn is_original(&self) -> bool {
        self.retweet_of.is_none()
    }

    /// The corpus wire form of this record.
    pub fn to_raw(&self) -> RawRecord {
        RawRecord {
            id: Some(serde_json::Value::from(self.tweet_id.0)),
            created_at: Some(format_timestamp(&self.created_at)),
            text: Some(self.text.clone()),
            retweet_count: Some(self.retweet_count as i64),
            retweeted_status_id: self.retweet_of.map(|id| serde_json::Value::from(id.0)),
            user: Some(RawUser {
                id: Some(serde_json::Value::from(self.author.user_id.0)),
                screen_name: Some(self.author.screen_name.clone()),
                followers_count: Some(self.author.followers_count as i64),
                verified: Some(self.author.verified),
                description: Some(self.author.description.clone()),
                created_at: self
                    .author
                    .account_created_at
                    .as_ref()
                    .map(format_timestamp),
            }),
            entities: Some(RawEntities {
                urls: self.urls.clone(),
                hashtags: self.hashtags.clone(),
            }),
            lang: self.lang.clone(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("raw record serializes")
    }
}

/// One corpus line as found on disk. Unknown fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub id: Option<serde_json::Value>,
    #[serde(default)]
    pub created_at: Option<String>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub retweet_count: Option<i64>,
    #[serde(default)]
    pub retweeted_status_id: Option<serde_json::Value>,
    #[serde(default)]
    pub user: Option<RawUser>,
    #[serde(default)]
    pub entities: Option<RawEntities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawUser {
    #[serde(default)]
    pub id: Option<serde_json::Value>,
    #[serde(default)]
    pub screen_name: Option<String>,
    #[serde(default)]
    pub followers_count: Option<i64>,
    #[serde(default)]
    pub verified: Option<bool>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawEntities {
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

/// Inclusive bounds a record's `created_at` must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epoch {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Epoch {
    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        self.start <= *t && *t <= self.end
    }
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// ISO-8601 (any offset) or the classic `Thu Mar 27 10:53:00 +0000 2014`
/// form; normalized to UTC whole seconds.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    let parsed = DateTime::parse_from_rfc3339(s)
        .or_else(|_| DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y"))
        .map(|t| t.with_timezone(&Utc))
        .ok()
        .or_else(|| {
            NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                .ok()
                .map(|n| Utc.from_utc_datetime(&n))
        })?;
    Some(parsed.trunc_subsecs(0))
}

fn parse_id(v: &serde_json::Value) -> Result<u64, RejectReason> {
    let repr: IdRepr = serde_json::from_value(v.clone()).map_err(|_| RejectReason::InvalidId)?;
    repr.to_u64().ok_or(RejectReason::InvalidId)
}

fn present(v: &Option<serde_json::Value>) -> Option<&serde_json::Value> {
    v.as_ref().filter(|v| !v.is_null())
}

/// Turn a wire record into a [`TweetRecord`], enforcing every record invariant.
pub fn validate_record(
    raw: &RawRecord,
    epoch: Option<&Epoch>,
) -> Result<TweetRecord, RejectReason> {
    let tweet_id = TweetId(parse_id(present(&raw.id).ok_or(RejectReason::MissingId)?)?);
    let created_at = raw
        .created_at
        .as_deref()
        .ok_or(RejectReason::MissingTimestamp)
        .and_then(|s| parse_timestamp(s).ok_or(RejectReason::InvalidTimestamp))?;
    let text = raw.text.clone().ok_or(RejectReason::MissingText)?;

    let user = raw.user.as_ref().ok_or(RejectReason::MissingAuthor)?;
    let user_id = UserId(parse_id(
        present(&user.id).ok_or(RejectReason::MissingAuthor)?,
    )?);
    let screen_name = user.screen_name.clone().unwrap_or_default();
    if screen_name.trim().is_empty() {
        return Err(RejectReason::EmptyScreenName);
    }
    let followers_count = user.followers_count.unwrap_or(0);
    if followers_count < 0 {
        return Err(RejectReason::NegativeFollowers);
    }
    let account_created_at = match user.created_at.as_deref() {
        None => None,
        Some(s) => Some(parse_timestamp(s).ok_or(RejectReason::InvalidTimestamp)?),
    };

    let retweet_count = raw.retweet_count.unwrap_or(0);
    if retweet_count < 0 {
        return Err(RejectReason::NegativeCount);
    }
    let retweet_of = present(&raw.retweeted_status_id)
        .map(parse_id)
        .transpose()?
        .map(TweetId);
    if retweet_of == Some(tweet_id) {
        return Err(RejectReason::SelfRetweet);
    }
    if let Some(epoch) = epoch {
        if !epoch.contains(&created_at) {
            return Err(RejectReason::OutsideEpoch);
        }
    }

    let entities = raw.entities.clone().unwrap_or_default();
    let hashtags = entities
        .hashtags
        .iter()
        .map(|h| h.trim().trim_start_matches('#').to_lowercase())
        .filter(|h| !h.is_empty())
        .collect();

    Ok(TweetRecord {
        tweet_id,
        created_at,
        text,
        author: UserRef {
            user_id,
            screen_name,
            followers_count: followers_count as u64,
            verified: user.verified.unwrap_or(false),
            description: user.description.clone().unwrap_or_default(),
            account_created_at,
        },
        retweet_count: retweet_count as u64,
        retweet_of,
        urls: entities.urls,
        hashtags,
        lang: raw.lang.clone().filter(|l| !l.is_empty()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordRole {
    Required,
    Optional,
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSpec {
    pub term: String,
    pub role: KeywordRole,
}

impl KeywordSpec {
    pub fn new(term: impl Into<String>, role: KeywordRole) -> Self {
        Self {
            term: term.into(),
            role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequiredMode {
    #[default]
    All,
    AtLeastOne,
}

/// Inclusive `[start, end]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow(pub DateTime<Utc>, pub DateTime<Utc>);

impl TimeWindow {
    pub fn start(&self) -> DateTime<Utc> {
        self.0
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.1
    }

    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        self.0 <= *t && *t <= self.1
    }
}

fn default_max_tweets() -> u32 {
    MAX_TWEETS_PER_TERM
}

/// The user-steered filter state of one investigation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvestigationConfig {
    pub investigative_tweet_id: TweetId,
    #[serde(default)]
    pub search_terms: Vec<String>,
    #[serde(default)]
    pub keywords: Vec<KeywordSpec>,
    #[serde(default)]
    pub required_mode: RequiredMode,
    #[serde(default)]
    pub optional_threshold: u32,
    #[serde(default)]
    pub time_window: Option<TimeWindow>,
    #[serde(default = "default_max_tweets")]
    pub max_tweets_per_term: u32,
    #[serde(default)]
    pub negation_add: Vec<String>,
    #[serde(default)]
    pub negation_remove: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigLimits {
    pub max_search_terms: usize,
}

impl Default for ConfigLimits {
    fn default() -> Self {
        Self {
            max_search_terms: 10,
        }
    }
}

impl InvestigationConfig {
    /// A draft config: no keywords, no search terms.
    pub fn new(investigative_tweet_id: TweetId) -> Self {
        Self {
            investigative_tweet_id,
            search_terms: Vec::new(),
            keywords: Vec::new(),
            required_mode: RequiredMode::All,
            optional_threshold: 0,
            time_window: None,
            max_tweets_per_term: MAX_TWEETS_PER_TERM,
            negation_add: Vec::new(),
            negation_remove: Vec::new(),
        }
    }

    pub fn keyword_terms(&self, role: KeywordRole) -> impl Iterator<Item = &str> {
        self.keywords
            .iter()
            .filter(move |k| k.role == role)
            .map(|k| k.term.as_str())
    }

    pub fn optional_count(&self) -> usize {
        self.keyword_terms(KeywordRole::Optional).count()
    }

    pub fn validate(&self, limits: &ConfigLimits) -> Result<(), ConfigError> {
        if self.search_terms.len() > limits.max_search_terms {
            return Err(ConfigError::TooManySearchTerms {
                count: self.search_terms.len(),
                max: limits.max_search_terms,
            });
        }
        for term in &self.search_terms {
            if normalize_term(term).is_none() {
                return Err(ConfigError::EmptySearchTerm(term.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for k in &self.keywords {
            let norm = normalize_term(&k.term).ok_or(ConfigError::EmptyKeyword)?;
            if !seen.insert(norm.clone()) {
                return Err(ConfigError::DuplicateKeyword(norm));
            }
        }
        let optional = self.optional_count();
        if self.optional_threshold as usize > optional {
            return Err(ConfigError::ThresholdTooHigh {
                threshold: self.optional_threshold,
                optional,
            });
        }
        if let Some(w) = &self.time_window {
            if w.start() >= w.end() {
                return Err(ConfigError::InvertedTimeWindow);
            }
        }
        if self.max_tweets_per_term == 0 || self.max_tweets_per_term > MAX_TWEETS_PER_TERM {
            return Err(ConfigError::TweetCap {
                got: self.max_tweets_per_term,
                max: MAX_TWEETS_PER_TERM,
            });
        }
        Ok(())
    }
}

/// One 10-minute bin of a story.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub index: usize,
    pub start: DateTime<Utc>,
    pub width_secs: i64,
    /// Every relevant record created in the bin, originals and retweets.
    pub tweet_ids: Vec<TweetId>,
    /// Sum of platform retweet counts over original tweets written in the bin.
    pub rt: u64,
}

impl Interval {
    /// Activity and `rt` are the same quantity.
    pub fn activity(&self) -> u64 {
        self.rt
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.start + chrono::Duration::seconds(self.width_secs)
    }

    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        self.start <= *t && *t < self.end()
    }
}

/// Start of the 600 s bin containing `t`, aligned to the Unix epoch.
pub fn bin_floor(t: &DateTime<Utc>) -> DateTime<Utc> {
    let secs = t.timestamp();
    let floored = secs - secs.rem_euclid(BIN_WIDTH_SECS);
    Utc.timestamp_opt(floored, 0)
        .single()
        .expect("in-range timestamp")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> RawRecord {
        serde_json::from_str(
            r#"{"id": "17", "created_at": "2014-03-27T10:53:00Z", "text": "hola",
                "user": {"id": 5, "screen_name": "someone"}}"#,
        )
        .unwrap()
    }

    #[test]
    fn minimal_record_is_accepted_with_defaults() {
        let rec = validate_record(&minimal(), None).unwrap();
        assert_eq!(rec.tweet_id, TweetId(17));
        assert!(rec.urls.is_empty() && rec.hashtags.is_empty());
        assert_eq!(rec.retweet_count, 0);
        assert!(rec.is_original());
    }

    #[test]
    fn self_retweet_rejected() {
        let mut raw = minimal();
        raw.retweeted_status_id = Some(serde_json::json!(17));
        assert_eq!(validate_record(&raw, None), Err(RejectReason::SelfRetweet));
        assert_eq!(RejectReason::SelfRetweet.to_string(), "self-retweet");
    }

    #[test]
    fn negative_count_rejected() {
        let mut raw = minimal();
        raw.retweet_count = Some(-1);
        assert_eq!(
            validate_record(&raw, None),
            Err(RejectReason::NegativeCount)
        );
    }

    #[test]
    fn missing_fields_rejected() {
        let mut raw = minimal();
        raw.id = None;
        assert_eq!(validate_record(&raw, None), Err(RejectReason::MissingId));
        let mut raw = minimal();
        raw.created_at = None;
        assert_eq!(
            validate_record(&raw, None),
            Err(RejectReason::MissingTimestamp)
        );
        let mut raw = minimal();
        raw.user = None;
        assert_eq!(
            validate_record(&raw, None),
            Err(RejectReason::MissingAuthor)
        );
    }

    #[test]
    fn epoch_enforced() {
        let t = parse_timestamp("2014-03-28T00:00:00Z").unwrap();
        let epoch = Epoch {
            start: t,
            end: t + chrono::Duration::days(1),
        };
        assert_eq!(
            validate_record(&minimal(), Some(&epoch)),
            Err(RejectReason::OutsideEpoch)
        );
    }

    #[test]
    fn timestamps_normalize_to_utc_seconds() {
        let a = parse_timestamp("2014-03-27T11:53:00.750+01:00").unwrap();
        let b = parse_timestamp("Thu Mar 27 10:53:00 +0000 2014").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bin_floor_aligns_to_ten_minutes() {
        let t = parse_timestamp("2014-03-27T10:53:00Z").unwrap();
        assert_eq!(format_timestamp(&bin_floor(&t)), "2014-03-27T10:50:00Z");
    }

    #[test]
    fn config_validation() {
        let limits = ConfigLimits::default();
        let mut c = InvestigationConfig::new(TweetId(1));
        c.keywords
            .push(KeywordSpec::new("a", KeywordRole::Optional));
        c.optional_threshold = 2;
        assert!(matches!(
            c.validate(&limits),
            Err(ConfigError::ThresholdTooHigh { .. })
        ));
        c.optional_threshold = 1;
        assert!(c.validate(&limits).is_ok());
        c.keywords
            .push(KeywordSpec::new(" A ", KeywordRole::Excluded));
        assert_eq!(
            c.validate(&limits),
            Err(ConfigError::DuplicateKeyword("a".into()))
        );
        c.keywords.pop();
        c.max_tweets_per_term = 18_001;
        assert!(matches!(
            c.validate(&limits),
            Err(ConfigError::TweetCap { .. })
        ));
    }

    #[test]
    fn config_file_uses_defaults() {
        let c: InvestigationConfig =
            serde_json::from_str(r#"{"investigative_tweet_id": "9"}"#).unwrap();
        assert_eq!(c, InvestigationConfig::new(TweetId(9)));
    }
}
