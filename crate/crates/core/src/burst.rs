//! Ten-minute binning, burstiness, breaking-interval detection and the
//! propagation dataset of the first tweets after the break.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::model::{bin_floor, Interval, TweetId, TweetRecord, BIN_WIDTH_SECS};
use crate::numeric::{mean, Scalar};
use crate::text::TermVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstParams<S> {
    /// Time step between consecutive bins in the burstiness formula (minutes).
    pub delta_t: S,
    /// Minimum burstiness for a bin to count as the break.
    pub theta: S,
    /// Cosine similarity at or above which two tweets share a color class.
    pub similarity_threshold: S,
    /// Minimum platform retweet count for a tweet to be an originator.
    pub visibility_min: u64,
    pub max_points: usize,
}

impl<S: Scalar> Default for BurstParams<S> {
    fn default() -> Self {
        Self {
            delta_t: S::from_count(10),
            theta: S::from_f64_lossy(0.9),
            similarity_threshold: S::from_f64_lossy(0.8),
            visibility_min: 5,
            max_points: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstScore<S> {
    pub interval_index: usize,
    pub burstiness: S,
    pub rt: u64,
    /// `rt` of the previous bin; the mean over all bins for the first one.
    pub rt_prev: S,
}

/// Contiguous bins from the first tweet's bin through the last tweet's bin,
/// empty bins included.
pub fn bin_intervals(relevant: &[&TweetRecord]) -> Result<Vec<Interval>, AnalysisError> {
    let first = relevant
        .iter()
        .map(|r| r.created_at)
        .min()
        .ok_or(AnalysisError::EmptyStory)?;
    let last = relevant
        .iter()
        .map(|r| r.created_at)
        .max()
        .ok_or(AnalysisError::EmptyStory)?;
    let origin = bin_floor(&first);
    let count = ((bin_floor(&last) - origin).num_seconds() / BIN_WIDTH_SECS) as usize + 1;
    let mut intervals: Vec<Interval> = (0..count)
        .map(|index| Interval {
            index,
            start: origin + Duration::seconds(index as i64 * BIN_WIDTH_SECS),
            width_secs: BIN_WIDTH_SECS,
            tweet_ids: Vec::new(),
            rt: 0,
        })
        .collect();
    let mut sorted: Vec<&&TweetRecord> = relevant.iter().collect();
    sorted.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then(a.tweet_id.cmp(&b.tweet_id))
    });
    for rec in sorted {
        let bin = &mut intervals[bin_index(origin, &rec.created_at)];
        bin.tweet_ids.push(rec.tweet_id);
        if rec.is_original() {
            bin.rt += rec.retweet_count;
        }
    }
    Ok(intervals)
}

pub(crate) fn bin_index(origin: DateTime<Utc>, t: &DateTime<Utc>) -> usize {
    ((*t - origin).num_seconds().div_euclid(BIN_WIDTH_SECS)) as usize
}

/// `1 − Δt / √(Δt² + (rt − rt_prev)²)`, evaluated as
/// `d² / (r · (r + Δt))` with `r = √(Δt² + d²)` to avoid cancellation.
pub fn burstiness_value<S: Scalar>(delta_t: S, rt: S, rt_prev: S) -> S {
    let d = rt - rt_prev;
    if d == S::zero() {
        return S::zero();
    }
    let r = delta_t.hypot(d);
    let b = d * d / (r * (r + delta_t));
    b.max(S::zero()).min(S::one())
}

pub fn burstiness<S: Scalar>(intervals: &[Interval], delta_t: S) -> Vec<BurstScore<S>> {
    let avg = mean(intervals.iter().map(|i| S::from_count(i.rt))).unwrap_or_else(S::zero);
    intervals
        .iter()
        .enumerate()
        .map(|(n, interval)| {
            let rt_prev = if n == 0 {
                avg
            } else {
                S::from_count(intervals[n - 1].rt)
            };
            BurstScore {
                interval_index: interval.index,
                burstiness: burstiness_value(delta_t, S::from_count(interval.rt), rt_prev),
                rt: interval.rt,
                rt_prev,
            }
        })
        .collect()
}

/// First bin that rises, beats the mean and bursts at least `theta`; failing
/// that the most bursty rising bin; failing that the busiest bin.
pub fn find_breaking_interval<S: Scalar>(scores: &[BurstScore<S>], theta: S) -> usize {
    if scores.is_empty() {
        return 0;
    }
    let avg = mean(scores.iter().map(|s| S::from_count(s.rt))).unwrap_or_else(S::zero);
    let rising = |s: &BurstScore<S>| S::from_count(s.rt) > s.rt_prev;

    if let Some(n) = scores
        .iter()
        .position(|s| S::from_count(s.rt) > avg && rising(s) && s.burstiness >= theta)
    {
        return n;
    }
    let mut best: Option<usize> = None;
    for (n, s) in scores.iter().enumerate() {
        if rising(s) && best.is_none_or(|b| s.burstiness > scores[b].burstiness) {
            best = Some(n);
        }
    }
    if let Some(n) = best {
        return n;
    }
    let mut top = 0;
    for (n, s) in scores.iter().enumerate() {
        if s.rt > scores[top].rt {
            top = n;
        }
    }
    top
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationPoint {
    pub tweet_id: TweetId,
    pub created_at: DateTime<Utc>,
    pub retweet_count: u64,
    pub followers_count: u64,
    pub verified: bool,
    pub color_class: usize,
    pub screen_name: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationDataset<S> {
    pub breaking_interval: Interval,
    pub burst: BurstScore<S>,
    pub points: Vec<PropagationPoint>,
    pub originator: Option<TweetId>,
}

#[derive(Debug, Clone)]
struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (hi, lo) = if self.rank[a] >= self.rank[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
    }
}

/// Single-linkage classes over pairs with cosine ≥ `threshold`. Class ids
/// are numbered in order of first appearance.
pub fn similarity_classes<S: Scalar>(texts: &[&str], threshold: S) -> Vec<usize> {
    let vectors: Vec<TermVector> = texts.iter().map(|t| TermVector::from_text(t)).collect();
    let mut sets = DisjointSet::new(vectors.len());
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            if vectors[i].cosine::<S>(&vectors[j]) >= threshold {
                sets.union(i, j);
            }
        }
    }
    let mut labels = std::collections::HashMap::new();
    (0..vectors.len())
        .map(|i| {
            let root = sets.find(i);
            let next = labels.len();
            *labels.entry(root).or_insert(next)
        })
        .collect()
}

/// Earliest point with at least `visibility_min` retweets; simultaneous
/// candidates are ranked by retweet count, then id.
pub fn find_originator(points: &[PropagationPoint], visibility_min: u64) -> Option<TweetId> {
    points
        .iter()
        .filter(|p| p.retweet_count >= visibility_min)
        .min_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then(b.retweet_count.cmp(&a.retweet_count))
                .then(a.tweet_id.cmp(&b.tweet_id))
        })
        .map(|p| p.tweet_id)
}

/// The first original tweets from the break onward (spilling past the bin
/// when it holds fewer than `max_points`).
pub fn build_propagation_dataset<S: Scalar>(
    relevant: &[&TweetRecord],
    intervals: &[Interval],
    scores: &[BurstScore<S>],
    breaking_index: usize,
    params: &BurstParams<S>,
) -> PropagationDataset<S> {
    let interval = intervals[breaking_index].clone();
    let mut originals: Vec<&&TweetRecord> = relevant
        .iter()
        .filter(|r| r.is_original() && r.created_at >= interval.start)
        .collect();
    originals.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then(a.tweet_id.cmp(&b.tweet_id))
    });
    originals.truncate(params.max_points);

    let texts: Vec<&str> = originals.iter().map(|r| r.text.as_str()).collect();
    let classes = similarity_classes(&texts, params.similarity_threshold);
    let points: Vec<PropagationPoint> = originals
        .iter()
        .zip(classes)
        .map(|(r, color_class)| PropagationPoint {
            tweet_id: r.tweet_id,
            created_at: r.created_at,
            retweet_count: r.retweet_count,
            followers_count: r.author.followers_count,
            verified: r.author.verified,
            color_class,
            screen_name: r.author.screen_name.clone(),
            text: r.text.clone(),
        })
        .collect();
    let originator = find_originator(&points, params.visibility_min);
    PropagationDataset {
        breaking_interval: interval,
        burst: scores[breaking_index],
        points,
        originator,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{format_timestamp, parse_timestamp};
    use crate::testutil::tweet;

    fn interval_with_rt(rts: &[u64]) -> Vec<Interval> {
        let origin = parse_timestamp("2014-03-27T10:00:00Z").unwrap();
        rts.iter()
            .enumerate()
            .map(|(index, &rt)| Interval {
                index,
                start: origin + Duration::seconds(index as i64 * BIN_WIDTH_SECS),
                width_secs: BIN_WIDTH_SECS,
                tweet_ids: vec![],
                rt,
            })
            .collect()
    }

    fn breaking(rts: &[u64]) -> usize {
        let scores = burstiness::<f64>(&interval_with_rt(rts), 10.0);
        find_breaking_interval(&scores, 0.9)
    }

    #[test]
    fn same_bin_and_half_open_boundary() {
        let a = tweet(1, "2014-03-27T11:00:30Z", "x");
        let b = tweet(2, "2014-03-27T11:05:00Z", "x");
        let bins = bin_intervals(&[&a, &b]).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(format_timestamp(&bins[0].start), "2014-03-27T11:00:00Z");

        let a = tweet(1, "2014-03-27T11:09:59Z", "x");
        let b = tweet(2, "2014-03-27T11:10:00Z", "x");
        let bins = bin_intervals(&[&a, &b]).unwrap();
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[0].tweet_ids, vec![TweetId(1)]);
        assert_eq!(bins[1].tweet_ids, vec![TweetId(2)]);
    }

    #[test]
    fn fifty_five_minute_story_alignment() {
        // 10:53 + 55 min = 11:48 -> bins 10:50, 11:00, 11:10, 11:20, 11:30, 11:40
        let a = tweet(1, "2014-03-27T10:53:00Z", "x");
        let b = tweet(2, "2014-03-27T11:48:00Z", "x");
        let bins = bin_intervals(&[&b, &a]).unwrap();
        assert_eq!(bins.len(), 6);
        assert_eq!(format_timestamp(&bins[0].start), "2014-03-27T10:50:00Z");
        assert!(bins[2].tweet_ids.is_empty() && bins[2].rt == 0);
    }

    #[test]
    fn empty_story_errors() {
        assert_eq!(bin_intervals(&[]), Err(AnalysisError::EmptyStory));
    }

    #[test]
    fn rt_counts_originals_only() {
        let mut a = tweet(1, "2014-03-27T10:00:00Z", "x");
        a.retweet_count = 7;
        let mut b = tweet(2, "2014-03-27T10:01:00Z", "RT x");
        b.retweet_count = 7;
        b.retweet_of = Some(TweetId(1));
        let bins = bin_intervals(&[&a, &b]).unwrap();
        assert_eq!(bins[0].rt, 7);
        assert_eq!(bins[0].activity(), 7);
    }

    #[test]
    fn burstiness_hand_values() {
        assert_eq!(burstiness_value(10.0f64, 5.0, 5.0), 0.0);
        assert!(
            (burstiness_value(10.0f64, 20.0, 10.0) - (1.0 - 10.0 / 200f64.sqrt())).abs() < 1e-12
        );
        assert!((burstiness_value(10.0f64, 20.0, 10.0) - 0.2929).abs() < 1e-4);
        assert!((burstiness_value(10.0f64, 1000.0, 0.0) - 0.9900005).abs() < 1e-7);
        assert!(
            (burstiness_value(10.0f32, 0.0, 10.0) - 0.2929).abs() < 1e-4,
            "declines score too"
        );
    }

    #[test]
    fn first_bin_compares_against_mean() {
        let scores = burstiness::<f64>(&interval_with_rt(&[10, 20, 30]), 10.0);
        assert_eq!(scores[0].rt_prev, 20.0);
        assert_eq!(scores[1].rt_prev, 10.0);
    }

    #[test]
    fn breaking_interval_examples() {
        assert_eq!(breaking(&[5, 5, 5, 5]), 0);
        assert_eq!(breaking(&[1, 1, 200, 150]), 2);
        assert_eq!(breaking(&[42]), 0);
    }

    #[test]
    fn fallback_picks_strongest_rise() {
        // no bin reaches theta; the biggest rise wins
        assert_eq!(breaking(&[0, 3, 0, 30, 28]), 3);
    }

    #[test]
    fn originator_skips_invisible_first_tweet() {
        let at = |s: &str| parse_timestamp(s).unwrap();
        let point = |id, t: &str, rt| PropagationPoint {
            tweet_id: TweetId(id),
            created_at: at(t),
            retweet_count: rt,
            followers_count: 0,
            verified: false,
            color_class: 0,
            screen_name: String::new(),
            text: String::new(),
        };
        let points = vec![
            point(1, "2014-03-27T10:49:00Z", 0),
            point(2, "2014-03-27T10:53:00Z", 580),
            point(3, "2014-03-27T11:01:00Z", 120),
        ];
        assert_eq!(find_originator(&points, 5), Some(TweetId(2)));
        let silent: Vec<_> = points
            .iter()
            .cloned()
            .map(|mut p| {
                p.retweet_count = 0;
                p
            })
            .collect();
        assert_eq!(find_originator(&silent, 5), None);
        let tie = vec![
            point(7, "2014-03-27T10:53:00Z", 6),
            point(8, "2014-03-27T10:53:00Z", 60),
        ];
        assert_eq!(find_originator(&tie, 5), Some(TweetId(8)));
    }

    #[test]
    fn color_classes() {
        let classes =
            similarity_classes::<f64>(&["avión en el mar", "avión en el mar", "remolcador"], 0.8);
        assert_eq!(classes, vec![0, 0, 1]);
    }

    #[test]
    fn propagation_undersupply() {
        let recs: Vec<TweetRecord> = (0..40)
            .map(|i| tweet(i + 1, &format!("2014-03-27T10:{:02}:00Z", 10 + i), "x"))
            .collect();
        let refs: Vec<&TweetRecord> = recs.iter().collect();
        let bins = bin_intervals(&refs).unwrap();
        let scores = burstiness::<f64>(&bins, 10.0);
        let ds = build_propagation_dataset(&refs, &bins, &scores, 0, &BurstParams::default());
        assert_eq!(ds.points.len(), 40);
    }
}
