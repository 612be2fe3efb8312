//! Whole-story activity series and per-bin tweet listings.

use std::cmp::Ordering;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::burst::bin_index;
use crate::error::AnalysisError;
use crate::model::{format_timestamp, Interval, TweetRecord};
use crate::negation::NegationMatcher;
use crate::text::{tokenize, TermPattern};

pub const ALL_SERIES: &str = "all";
pub const NEGATION_SERIES: &str = "negation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineBin {
    pub interval_start: DateTime<Utc>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineSeries {
    pub label: String,
    pub bins: Vec<TimelineBin>,
}

impl TimelineSeries {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn first_nonzero(&self) -> Option<DateTime<Utc>> {
        self.bins
            .iter()
            .find(|b| b.count > 0)
            .map(|b| b.interval_start)
    }
}

fn series_over(
    label: &str,
    intervals: &[Interval],
    hits: impl Iterator<Item = DateTime<Utc>>,
) -> TimelineSeries {
    let mut bins: Vec<TimelineBin> = intervals
        .iter()
        .map(|i| TimelineBin {
            interval_start: i.start,
            count: 0,
        })
        .collect();
    if let Some(first) = intervals.first() {
        for t in hits {
            if let Some(bin) = bins.get_mut(bin_index(first.start, &t)) {
                bin.count += 1;
            }
        }
    }
    TimelineSeries {
        label: label.to_string(),
        bins,
    }
}

/// One series for a keyword, counting every record (original or retweet)
/// whose text contains it.
pub fn keyword_series(
    relevant: &[&TweetRecord],
    intervals: &[Interval],
    keyword: &str,
) -> TimelineSeries {
    let label = keyword.trim().to_string();
    match TermPattern::new(keyword) {
        Some(p) => series_over(
            &label,
            intervals,
            relevant
                .iter()
                .filter(|r| p.matches(&tokenize(&r.text)))
                .map(|r| r.created_at),
        ),
        None => series_over(&label, intervals, std::iter::empty()),
    }
}

/// `all` and `negation` series plus one per extra keyword, on the shared bin grid.
pub fn build_timeline(
    relevant: &[&TweetRecord],
    intervals: &[Interval],
    negation: &NegationMatcher,
    extra_keywords: &[String],
) -> Result<Vec<TimelineSeries>, AnalysisError> {
    if relevant.is_empty() || intervals.is_empty() {
        return Err(AnalysisError::EmptyStory);
    }
    let mut out = vec![
        series_over(ALL_SERIES, intervals, relevant.iter().map(|r| r.created_at)),
        series_over(
            NEGATION_SERIES,
            intervals,
            relevant
                .iter()
                .filter(|r| negation.is_negation(r))
                .map(|r| r.created_at),
        ),
    ];
    out.extend(
        extra_keywords
            .iter()
            .map(|k| keyword_series(relevant, intervals, k)),
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinSortKey {
    Retweets,
    Time,
    OriginalFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    Asc,
    #[default]
    Desc,
}

/// Tweets written in the bin starting at `interval_start`, sorted by `key`.
/// Equal keys always fall back to ascending tweet id.
pub fn list_bin<'a>(
    relevant: &[&'a TweetRecord],
    intervals: &[Interval],
    interval_start: DateTime<Utc>,
    key: BinSortKey,
    order: SortOrder,
) -> Result<Vec<&'a TweetRecord>, AnalysisError> {
    let bin = intervals
        .iter()
        .find(|i| i.start == interval_start)
        .ok_or_else(|| AnalysisError::UnknownBin(format_timestamp(&interval_start)))?;
    let mut rows: Vec<&TweetRecord> = relevant
        .iter()
        .copied()
        .filter(|r| bin.contains(&r.created_at))
        .collect();
    rows.sort_by(|a, b| {
        let primary = match key {
            BinSortKey::Retweets => a.retweet_count.cmp(&b.retweet_count),
            BinSortKey::Time => a.created_at.cmp(&b.created_at),
            // ascending puts originals first
            BinSortKey::OriginalFirst => a.is_retweet().cmp(&b.is_retweet()),
        };
        let primary = if order == SortOrder::Desc {
            primary.reverse()
        } else {
            primary
        };
        match primary {
            Ordering::Equal => a.tweet_id.cmp(&b.tweet_id),
            other => other,
        }
    });
    Ok(rows)
}
