//! End-to-end recomputation of a story from a corpus and a config.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::burst::{
    bin_intervals, build_propagation_dataset, burstiness, find_breaking_interval, BurstParams,
    BurstScore, PropagationDataset,
};
use crate::corpus::{Corpus, SearchWindow};
use crate::error::{AnalysisError, ConfigError};
use crate::metrics::{
    build_link_bibliography, compute_metrics, crowd_signal, CrowdSignal, LinkBibliography,
    StoryCategory, StoryMetrics,
};
use crate::model::{ConfigLimits, Interval, InvestigationConfig};
use crate::negation::{split_story, NegationLexicon};
use crate::network::{build_story_graphs, NetworkParams, StoryGraphs};
use crate::numeric::Scalar;
use crate::relevancy::{build_relevant_set, RelevantSet};
use crate::summary::{summarize, InvestigationSummary, SummaryParams};
use crate::timeline::{build_timeline, TimelineSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams<S> {
    pub burst: BurstParams<S>,
    pub network: NetworkParams,
    pub summary: SummaryParams<S>,
    pub limits: ConfigLimits,
    /// Skepticism at or above which a quiet story is flagged as doubted.
    pub s_thresh: S,
    /// Search horizon in days, counted back from the corpus's newest tweet.
    pub horizon_days: f64,
}

impl<S: Scalar> Default for AnalysisParams<S> {
    fn default() -> Self {
        Self {
            burst: BurstParams::default(),
            network: NetworkParams::default(),
            summary: SummaryParams::default(),
            limits: ConfigLimits::default(),
            s_thresh: S::half(),
            horizon_days: SearchWindow::DEFAULT_HORIZON_DAYS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Artifacts<S> {
    pub relevant: RelevantSet,
    pub intervals: Vec<Interval>,
    pub burst_scores: Vec<BurstScore<S>>,
    /// Absent for an empty story.
    pub propagation: Option<PropagationDataset<S>>,
    pub timeline: Vec<TimelineSeries>,
    pub graphs: StoryGraphs<S>,
    pub links: LinkBibliography,
    pub metrics: StoryMetrics<S>,
    pub crowd_signal: CrowdSignal,
    /// Absent for an empty story.
    pub summary: Option<InvestigationSummary<S>>,
}

impl<S: Scalar> Artifacts<S> {
    pub fn set_category(&mut self, category: StoryCategory) {
        self.metrics = self.metrics.clone().with_category(category);
        if let Some(s) = &mut self.summary {
            s.metrics = self.metrics.clone();
        }
    }

    /// Canonical serialized form; equal artifacts give equal bytes.
    pub fn to_json(&self) -> serde_json::Result<Vec<u8>> {
        serde_json::to_vec_pretty(self)
    }

    pub fn dataset(&self, kind: DatasetKind) -> serde_json::Result<Value> {
        match kind {
            DatasetKind::Propagation => serde_json::to_value(&self.propagation),
            DatasetKind::Timeline => serde_json::to_value(TimelineDocument {
                series: &self.timeline,
                burstiness: &self.burst_scores,
            }),
            DatasetKind::RetweetNetwork => serde_json::to_value(&self.graphs.retweet),
            DatasetKind::CoretweetedNetwork => serde_json::to_value(&self.graphs.coretweeted),
            DatasetKind::Links => serde_json::to_value(&self.links),
            DatasetKind::Summary => serde_json::to_value(&self.summary),
            DatasetKind::Metrics => serde_json::to_value(MetricsDocument {
                metrics: &self.metrics,
                crowd_signal: self.crowd_signal,
                main_actors: &self.graphs.main_actors,
            }),
        }
    }
}

#[derive(Serialize)]
struct TimelineDocument<'a, S> {
    series: &'a [TimelineSeries],
    burstiness: &'a [BurstScore<S>],
}

#[derive(Serialize)]
#[serde(bound = "S: Scalar")]
struct MetricsDocument<'a, S> {
    metrics: &'a StoryMetrics<S>,
    crowd_signal: CrowdSignal,
    main_actors: &'a [crate::network::Actor],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Propagation,
    Timeline,
    RetweetNetwork,
    CoretweetedNetwork,
    Links,
    Summary,
    Metrics,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 7] = [
        Self::Propagation,
        Self::Timeline,
        Self::RetweetNetwork,
        Self::CoretweetedNetwork,
        Self::Links,
        Self::Summary,
        Self::Metrics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Propagation => "propagation",
            Self::Timeline => "timeline",
            Self::RetweetNetwork => "retweet_network",
            Self::CoretweetedNetwork => "coretweeted_network",
            Self::Links => "links",
            Self::Summary => "summary",
            Self::Metrics => "metrics",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDatasetKind(pub String);

impl fmt::Display for UnknownDatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let valid: Vec<&str> = DatasetKind::ALL.iter().map(|k| k.as_str()).collect();
        write!(
            f,
            "unknown dataset kind {:?}; valid kinds: {}",
            self.0,
            valid.join(", ")
        )
    }
}

impl std::error::Error for UnknownDatasetKind {}

impl FromStr for DatasetKind {
    type Err = UnknownDatasetKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownDatasetKind(s.to_string()))
    }
}

/// Validate `config`, select the relevant set and derive every artifact.
pub fn run_pipeline<S: Scalar>(
    corpus: &Corpus,
    config: &InvestigationConfig,
    lexicon: &NegationLexicon,
    params: &AnalysisParams<S>,
) -> Result<Artifacts<S>, AnalysisError> {
    config.validate(&params.limits)?;
    if corpus.get(config.investigative_tweet_id).is_none() {
        return Err(AnalysisError::UnknownTweet(
            config.investigative_tweet_id.to_string(),
        ));
    }
    let lexicon = lexicon.for_config(config)?;
    let window = SearchWindow::new(params.horizon_days, SearchWindow::for_corpus(corpus).now)
        .map_err(|e| ConfigError::Malformed(e.to_string()))?;
    let relevant = build_relevant_set(corpus, config, &window);
    let records = relevant.records(corpus);
    let (negating, _) = split_story(&records, &lexicon);
    let metrics: StoryMetrics<S> = compute_metrics(&records, &negating);
    let graphs = build_story_graphs(&records, corpus, &params.network);
    let links = build_link_bibliography(&records);
    let signal = crowd_signal(&metrics, params.s_thresh);

    if records.is_empty() {
        tracing::info!(tweet = %config.investigative_tweet_id, "empty story");
        return Ok(Artifacts {
            relevant,
            intervals: Vec::new(),
            burst_scores: Vec::new(),
            propagation: None,
            timeline: Vec::new(),
            graphs,
            links,
            metrics,
            crowd_signal: signal,
            summary: None,
        });
    }

    let intervals = bin_intervals(&records)?;
    let scores = burstiness(&intervals, params.burst.delta_t);
    let breaking = find_breaking_interval(&scores, params.burst.theta);
    let propagation =
        build_propagation_dataset(&records, &intervals, &scores, breaking, &params.burst);
    let timeline = build_timeline(&records, &intervals, &lexicon.matcher(), &[])?;
    let summary = summarize(
        &propagation,
        &timeline,
        &graphs.main_actors,
        &metrics,
        &params.summary,
    );
    tracing::debug!(
        relevant = records.len(),
        bins = intervals.len(),
        breaking,
        "pipeline done"
    );
    Ok(Artifacts {
        relevant,
        intervals,
        burst_scores: scores,
        propagation: Some(propagation),
        timeline,
        graphs,
        links,
        metrics,
        crowd_signal: signal,
        summary: Some(summary),
    })
}
