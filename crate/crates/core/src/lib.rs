//! Rumor investigation over archived tweet corpora.
//!
//! Starting from one investigative tweet and a user-steered keyword filter,
//! the pipeline selects a story's tweets and derives its breaking interval,
//! originator, timeline, retweet and co-retweeted networks, link
//! bibliography and h-index based propagation and skepticism scores.
//!
//! Real-valued kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what stored artifacts use.

pub mod burst;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod negation;
pub mod network;
pub mod numeric;
pub mod pipeline;
pub mod relevancy;
pub mod summary;
pub mod synthetic;
pub mod text;
pub mod timeline;

#[cfg(test)]
mod testutil;

pub use corpus::{load_corpus, Corpus, SearchWindow};
pub use error::{AnalysisError, ConfigError, CorpusError, RejectReason, SearchError};
pub use model::{
    InvestigationConfig, KeywordRole, KeywordSpec, RequiredMode, TimeWindow, TweetId, TweetRecord,
    UserId,
};
pub use negation::NegationLexicon;
pub use numeric::Scalar;
pub use pipeline::{run_pipeline, DatasetKind};

pub type Real = f64;
pub type Artifacts = pipeline::Artifacts<Real>;
pub type AnalysisParams = pipeline::AnalysisParams<Real>;
pub type StoryMetrics = metrics::StoryMetrics<Real>;
pub type Skepticism = metrics::Skepticism<Real>;
pub type InvestigationSummary = summary::InvestigationSummary<Real>;
pub type PropagationDataset = burst::PropagationDataset<Real>;
pub type KeywordRating = relevancy::KeywordRating<Real>;
