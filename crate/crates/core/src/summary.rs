//! The automated investigation report: a recomposition of upstream results.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::burst::PropagationDataset;
use crate::metrics::StoryMetrics;
use crate::model::{format_timestamp, TweetId};
use crate::network::Actor;
use crate::numeric::Scalar;
use crate::timeline::{TimelineSeries, ALL_SERIES, NEGATION_SERIES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryParams<S> {
    /// The story is still spreading when its last bin holds at least this
    /// fraction of the peak bin.
    pub spreading_fraction: S,
    pub headline_actors: usize,
}

impl<S: Scalar> Default for SummaryParams<S> {
    fn default() -> Self {
        Self {
            spreading_fraction: S::from_f64_lossy(0.25),
            headline_actors: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginatorInfo {
    pub tweet_id: TweetId,
    pub screen_name: String,
    pub retweet_count: u64,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct InvestigationSummary<S> {
    pub originator: Option<OriginatorInfo>,
    pub break_time: DateTime<Utc>,
    pub burst_strength: S,
    pub still_spreading: bool,
    pub top_propagators: Vec<Actor>,
    pub negation_present: bool,
    pub first_negation_time: Option<DateTime<Utc>>,
    pub metrics: StoryMetrics<S>,
    pub headline_text: String,
}

fn series<'a>(timeline: &'a [TimelineSeries], label: &str) -> Option<&'a TimelineSeries> {
    timeline.iter().find(|s| s.label == label)
}

/// Last bin at or above `fraction` of the peak. A series with no tweets is
/// not spreading.
pub fn still_spreading<S: Scalar>(all: &TimelineSeries, fraction: S) -> bool {
    let peak = all.bins.iter().map(|b| b.count).max().unwrap_or(0);
    let last = all.bins.last().map_or(0, |b| b.count);
    peak > 0 && S::from_count(last) >= fraction * S::from_count(peak)
}

pub fn summarize<S: Scalar>(
    propagation: &PropagationDataset<S>,
    timeline: &[TimelineSeries],
    main_actors: &[Actor],
    metrics: &StoryMetrics<S>,
    params: &SummaryParams<S>,
) -> InvestigationSummary<S> {
    let originator = propagation.originator.and_then(|id| {
        propagation
            .points
            .iter()
            .find(|p| p.tweet_id == id)
            .map(|p| OriginatorInfo {
                tweet_id: p.tweet_id,
                screen_name: p.screen_name.clone(),
                retweet_count: p.retweet_count,
                created_at: p.created_at,
            })
    });
    let first_negation_time =
        series(timeline, NEGATION_SERIES).and_then(TimelineSeries::first_nonzero);
    let spreading =
        series(timeline, ALL_SERIES).is_some_and(|s| still_spreading(s, params.spreading_fraction));
    let mut summary = InvestigationSummary {
        originator,
        break_time: propagation.breaking_interval.start,
        burst_strength: propagation.burst.burstiness,
        still_spreading: spreading,
        top_propagators: main_actors.to_vec(),
        negation_present: first_negation_time.is_some(),
        first_negation_time,
        metrics: metrics.clone(),
        headline_text: String::new(),
    };
    summary.headline_text = headline(&summary, params.headline_actors);
    summary
}

fn sentences<S: Scalar>(s: &InvestigationSummary<S>, actors: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(6);
    out.push(match &s.originator {
        Some(o) => format!(
            "Originator: @{} at {} ({} retweets).",
            o.screen_name,
            format_timestamp(&o.created_at),
            o.retweet_count
        ),
        None => "Originator: no visible tweet in the breaking interval.".to_string(),
    });
    out.push(format!(
        "Burst: broke at {} (burstiness {:.3}).",
        format_timestamp(&s.break_time),
        s.burst_strength.to_f64().unwrap_or(0.0)
    ));
    out.push(
        if s.still_spreading {
            "Timeline: still spreading."
        } else {
            "Timeline: no longer spreading."
        }
        .to_string(),
    );
    out.push(format!(
        "Propagation: {} (h = {}).",
        s.metrics.propagation_level, s.metrics.propagation_h
    ));
    out.push(match s.first_negation_time {
        Some(t) => format!(
            "Negation: first seen at {} (skepticism {}).",
            format_timestamp(&t),
            s.metrics.skepticism
        ),
        None => "Negation: none found.".to_string(),
    });
    out.push(if s.top_propagators.is_empty() {
        "Main actors: none.".to_string()
    } else {
        let names: Vec<String> = s
            .top_propagators
            .iter()
            .take(actors)
            .map(|a| format!("@{} ({} retweeters)", a.screen_name, a.distinct_retweeters))
            .collect();
        format!("Main actors: {}.", names.join(", "))
    });
    out
}

fn headline<S: Scalar>(s: &InvestigationSummary<S>, actors: usize) -> String {
    sentences(s, actors).join(" ")
}

impl<S: Scalar> InvestigationSummary<S> {
    /// The headline, one answer per line, followed by every main actor.
    pub fn render_text(&self) -> String {
        let mut out = sentences(self, 0);
        out.pop();
        for (rank, a) in self.top_propagators.iter().enumerate() {
            out.push(format!(
                "  {}. @{}: {} retweeters, {} retweets",
                rank + 1,
                a.screen_name,
                a.distinct_retweeters,
                a.retweet_events
            ));
        }
        if self.top_propagators.is_empty() {
            out.push("Main actors: none.".into());
        } else {
            out.insert(
                out.len() - self.top_propagators.len(),
                "Main actors:".into(),
            );
        }
        out.join("\n") + "\n"
    }
}
