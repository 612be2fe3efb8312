//! h-index scores, skepticism, story categories and the crowd signal.

mod links;
mod scatter;

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::model::{TweetId, TweetRecord};
use crate::numeric::Scalar;

pub use links::{build_link_bibliography, canonicalize_url, LinkBibliography, LinkEntry};
pub use scatter::{scatter_export, write_scatter_csv, ScatterRow, StoryPoint};

/// Largest `h` such that at least `h` of the counts are `>= h`.
pub fn h_index(counts: &[u64]) -> u64 {
    let n = counts.len();
    // at[k] = how many counts equal k, with everything above n folded into n
    let mut at = vec![0usize; n + 1];
    for &c in counts {
        at[(c as usize).min(n)] += 1;
    }
    let mut at_least = 0;
    for h in (0..=n).rev() {
        at_least += at[h];
        if at_least >= h {
            return h as u64;
        }
    }
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationLevel {
    Insignificant,
    Low,
    Moderate,
    High,
    Extensive,
}

impl PropagationLevel {
    pub fn from_h(h: u64) -> Self {
        match h {
            0..=16 => Self::Insignificant,
            17..=32 => Self::Low,
            33..=64 => Self::Moderate,
            65..=128 => Self::High,
            _ => Self::Extensive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Insignificant => "insignificant",
            Self::Low => "low",
            Self::Moderate => "moderate",
            Self::High => "high",
            Self::Extensive => "extensive",
        }
    }
}

impl fmt::Display for PropagationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Negation-to-non-negation h ratio. Serialized as a plain number, or the
/// string `"infinite"` when only negating tweets got retweeted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Skepticism<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Skepticism<S> {
    pub fn from_counts(negation_h: u64, non_negation_h: u64) -> Self {
        match (negation_h, non_negation_h) {
            (0, _) => Self::Finite(S::zero()),
            (_, 0) => Self::Infinite,
            (n, d) => Self::Finite(S::from_count(n) / S::from_count(d)),
        }
    }

    pub fn finite(self) -> Option<S> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn at_least(self, threshold: S) -> bool {
        match self {
            Self::Finite(v) => v >= threshold,
            Self::Infinite => true,
        }
    }
}

impl<S: Scalar> fmt::Display for Skepticism<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("infinite"),
        }
    }
}

impl<S: Scalar> Serialize for Skepticism<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        match self {
            Self::Finite(v) => v.serialize(serializer),
            Self::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Skepticism<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V<S>(std::marker::PhantomData<S>);

        impl<S: Scalar> Visitor<'_> for V<S> {
            type Value = Skepticism<S>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or \"infinite\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                if !v.is_finite() || v < 0.0 {
                    return Err(E::custom(format!("invalid skepticism {v}")));
                }
                Ok(Skepticism::Finite(S::from_f64_lossy(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Skepticism::Finite(S::from_count(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                u64::try_from(v)
                    .map(|v| Skepticism::Finite(S::from_count(v)))
                    .map_err(|_| E::custom(format!("invalid skepticism {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == "infinite" {
                    Ok(Skepticism::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(V(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryCategory {
    RumorTrue,
    RumorFalse,
    EventMeme,
    #[default]
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategorySource {
    Manual,
    #[default]
    Unset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct StoryMetrics<S> {
    pub propagation_h: u64,
    pub propagation_level: PropagationLevel,
    pub negation_h: u64,
    pub non_negation_h: u64,
    pub skepticism: Skepticism<S>,
    pub category: StoryCategory,
    pub category_source: CategorySource,
}

impl<S: Scalar> StoryMetrics<S> {
    pub fn from_h(propagation_h: u64, negation_h: u64, non_negation_h: u64) -> Self {
        Self {
            propagation_h,
            propagation_level: PropagationLevel::from_h(propagation_h),
            negation_h,
            non_negation_h,
            skepticism: Skepticism::from_counts(negation_h, non_negation_h),
            category: StoryCategory::Other,
            category_source: CategorySource::Unset,
        }
    }

    /// Category is editorial metadata and only ever set by hand.
    pub fn with_category(mut self, category: StoryCategory) -> Self {
        self.category = category;
        self.category_source = CategorySource::Manual;
        self
    }
}

fn original_counts<'a>(records: impl Iterator<Item = &'a TweetRecord>) -> Vec<u64> {
    records
        .filter(|r| r.is_original())
        .map(|r| r.retweet_count)
        .collect()
}

/// Scores over the story's original tweets; `negating` is the negation half
/// of the split, everything else in `relevant` is the other half.
pub fn compute_metrics<S: Scalar>(
    relevant: &[&TweetRecord],
    negating: &[TweetId],
) -> StoryMetrics<S> {
    let negating: std::collections::HashSet<TweetId> = negating.iter().copied().collect();
    let (neg, non): (Vec<&TweetRecord>, Vec<&TweetRecord>) = relevant
        .iter()
        .copied()
        .partition(|r| negating.contains(&r.tweet_id));
    StoryMetrics::from_h(
        h_index(&original_counts(relevant.iter().copied())),
        h_index(&original_counts(neg.into_iter())),
        h_index(&original_counts(non.into_iter())),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrowdSignal {
    Doubted,
    Undoubted,
}

/// Advisory only: many doubters and little reach.
pub fn crowd_signal<S: Scalar>(metrics: &StoryMetrics<S>, s_thresh: S) -> CrowdSignal {
    let quiet = matches!(
        metrics.propagation_level,
        PropagationLevel::Insignificant | PropagationLevel::Low
    );
    if quiet && metrics.skepticism.at_least(s_thresh) {
        CrowdSignal::Doubted
    } else {
        CrowdSignal::Undoubted
    }
}

pub fn default_s_thresh<S: Scalar>() -> S {
    S::half()
}
