//! Investigations over a fixed set of loaded corpora.
//!
//! Reads are served from an in-memory snapshot per investigation. Writes to
//! one investigation go through its own async mutex, so refinements queue in
//! arrival order and each one merges into the config left by the previous.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use serde::Serialize;
use serde_json::Value;

use rumortrace::metrics::StoryCategory;
use rumortrace::relevancy::{rate_keyword, suggest_keywords, KeywordSuggestion, RatingWeights};
use rumortrace::timeline::{keyword_series, list_bin, BinSortKey, SortOrder};
use rumortrace::{
    run_pipeline, AnalysisError, AnalysisParams, Artifacts, ConfigError, Corpus, DatasetKind,
    InvestigationConfig, KeywordRating, NegationLexicon, TweetId, TweetRecord,
};

use crate::store::{InvestigationMeta, InvestigationState, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("investigation {0} not found")]
    NotFound(String),
    #[error("unknown corpus {0:?}")]
    UnknownCorpus(String),
    #[error("a corpus name is required; loaded corpora: {0}")]
    CorpusRequired(String),
    #[error("tweet {0} is not in the corpus")]
    UnknownTweet(TweetId),
    #[error(transparent)]
    InvalidConfig(ConfigError),
    #[error("investigation {id} has no computed artifacts (state: {state})")]
    NotComputed { id: String, state: &'static str },
    #[error("unknown dataset kind {0:?}")]
    UnknownKind(String),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Internal(String),
}

impl InvestigationState {
    pub fn as_str(self) -> &'static str {
        match self {
            InvestigationState::Draft => "draft",
            InvestigationState::Computed => "computed",
            InvestigationState::Error => "error",
        }
    }
}

/// Current state of one investigation.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub meta: InvestigationMeta,
    pub artifacts: Option<Arc<Artifacts>>,
}

impl Snapshot {
    pub fn computed(&self) -> Result<&Arc<Artifacts>, ServiceError> {
        self.artifacts
            .as_ref()
            .ok_or_else(|| ServiceError::NotComputed {
                id: self.meta.id.clone(),
                state: self.meta.state.as_str(),
            })
    }
}

/// Relevant-set overview embedded in the investigation document.
#[derive(Debug, Clone, Serialize)]
pub struct ArtifactOverview {
    pub relevant_count: usize,
    pub originals_count: usize,
    pub retweets_count: usize,
    pub status: rumortrace::relevancy::StoryStatus,
    pub metrics: rumortrace::StoryMetrics,
    pub crowd_signal: rumortrace::metrics::CrowdSignal,
    pub summary: Option<rumortrace::InvestigationSummary>,
    pub datasets: BTreeMap<&'static str, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvestigationDocument {
    pub id: String,
    pub corpus: String,
    pub state: InvestigationState,
    pub investigative_tweet: Option<TweetRecord>,
    pub config: InvestigationConfig,
    pub category: Option<StoryCategory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub created_at: chrono::DateTime<Utc>,
    pub updated_at: chrono::DateTime<Utc>,
    pub artifacts: Option<ArtifactOverview>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryView {
    #[default]
    Condensed,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct StoryRow {
    pub id: String,
    pub state: InvestigationState,
    pub investigative_tweet_id: TweetId,
    pub tweet_text: Option<String>,
    pub propagation_level: Option<rumortrace::metrics::PropagationLevel>,
    pub skepticism: Option<rumortrace::Skepticism>,
    pub category: StoryCategory,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Option<rumortrace::InvestigationSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<rumortrace::StoryMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links: Option<BTreeMap<String, String>>,
}

pub fn dataset_links(id: &str) -> BTreeMap<&'static str, String> {
    DatasetKind::ALL
        .iter()
        .map(|k| (k.as_str(), format!("/investigations/{id}/datasets/{k}")))
        .collect()
}

pub struct Service {
    corpora: BTreeMap<String, Arc<Corpus>>,
    store: Store,
    lexicon: Arc<NegationLexicon>,
    params: Arc<AnalysisParams>,
    snapshots: RwLock<HashMap<String, Arc<Snapshot>>>,
    write_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl Service {
    pub fn new(
        corpora: BTreeMap<String, Arc<Corpus>>,
        store: Store,
        lexicon: NegationLexicon,
        params: AnalysisParams,
    ) -> Self {
        Self {
            corpora,
            store,
            lexicon: Arc::new(lexicon),
            params: Arc::new(params),
            snapshots: RwLock::new(HashMap::new()),
            write_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn corpus_names(&self) -> Vec<&str> {
        self.corpora.keys().map(String::as_str).collect()
    }

    fn corpus(&self, name: &str) -> Result<&Arc<Corpus>, ServiceError> {
        self.corpora
            .get(name)
            .ok_or_else(|| ServiceError::UnknownCorpus(name.to_string()))
    }

    fn write_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.write_locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    fn publish(&self, snapshot: Snapshot) -> Arc<Snapshot> {
        let snap = Arc::new(snapshot);
        let mut map = self.snapshots.write().expect("snapshot table poisoned");
        map.insert(snap.meta.id.clone(), snap.clone());
        snap
    }

    pub fn snapshot(&self, id: &str) -> Result<Arc<Snapshot>, ServiceError> {
        if let Some(s) = self
            .snapshots
            .read()
            .expect("snapshot table poisoned")
            .get(id)
        {
            return Ok(s.clone());
        }
        let meta = match self.store.load_meta(id) {
            Ok(Some(m)) => m,
            Ok(None) | Err(StoreError::BadId(_)) => {
                return Err(ServiceError::NotFound(id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let artifacts = self.store.load_artifacts(&meta)?.map(Arc::new);
        // a concurrent loader may have won; either copy reflects the same files
        let mut map = self.snapshots.write().expect("snapshot table poisoned");
        Ok(map
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(Snapshot { meta, artifacts }))
            .clone())
    }

    pub fn create(
        &self,
        corpus: Option<&str>,
        tweet_id: TweetId,
    ) -> Result<Arc<Snapshot>, ServiceError> {
        let name = match corpus {
            Some(n) => n.to_string(),
            None if self.corpora.len() == 1 => {
                self.corpora.keys().next().cloned().unwrap_or_default()
            }
            None => return Err(ServiceError::CorpusRequired(self.corpus_names().join(", "))),
        };
        if self.corpus(&name)?.get(tweet_id).is_none() {
            return Err(ServiceError::UnknownTweet(tweet_id));
        }
        let now = Utc::now();
        let meta = InvestigationMeta {
            id: uuid::Uuid::new_v4().simple().to_string(),
            corpus: name,
            investigative_tweet_id: tweet_id,
            state: InvestigationState::Draft,
            config: InvestigationConfig::new(tweet_id),
            category: None,
            error: None,
            created_at: now,
            updated_at: now,
            generation: None,
        };
        self.store.save_meta(&meta)?;
        tracing::info!(id = %meta.id, tweet = %tweet_id, "investigation created");
        Ok(self.publish(Snapshot {
            meta,
            artifacts: None,
        }))
    }

    /// Merge `patch` (JSON merge patch) into the config and recompute.
    /// An invalid result leaves the investigation untouched.
    pub async fn refine(&self, id: &str, patch: &Value) -> Result<Arc<Snapshot>, ServiceError> {
        let lock = self.write_lock(id);
        let _guard = lock.lock().await;
        let current = self.snapshot(id)?;
        let config = merged_config(&current.meta.config, patch)?;
        config
            .validate(&self.params.limits)
            .map_err(ServiceError::InvalidConfig)?;
        self.lexicon
            .for_config(&config)
            .map_err(ServiceError::InvalidConfig)?;
        let corpus = self.corpus(&current.meta.corpus)?.clone();

        let mut meta = current.meta.clone();
        meta.config = config;
        let lexicon = self.lexicon.clone();
        let params = self.params.clone();
        let store = self.store.clone();
        let snapshot = tokio::task::spawn_blocking(move || -> Result<Snapshot, ServiceError> {
            meta.updated_at = Utc::now();
            match compute(&corpus, &meta, &lexicon, &params) {
                Ok(artifacts) => {
                    store.commit(&mut meta, &artifacts)?;
                    Ok(Snapshot {
                        meta,
                        artifacts: Some(Arc::new(artifacts)),
                    })
                }
                Err(AnalysisError::Config(e)) => Err(ServiceError::InvalidConfig(e)),
                Err(e) => {
                    tracing::warn!(id = %meta.id, error = %e, "pipeline failed");
                    meta.state = InvestigationState::Error;
                    meta.error = Some(e.to_string());
                    meta.generation = None;
                    store.save_meta(&meta)?;
                    Ok(Snapshot {
                        meta,
                        artifacts: None,
                    })
                }
            }
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
        Ok(self.publish(snapshot))
    }

    pub async fn set_category(
        &self,
        id: &str,
        category: StoryCategory,
    ) -> Result<Arc<Snapshot>, ServiceError> {
        let lock = self.write_lock(id);
        let _guard = lock.lock().await;
        let current = self.snapshot(id)?;
        let mut meta = current.meta.clone();
        meta.category = Some(category);
        meta.updated_at = Utc::now();
        let store = self.store.clone();
        let artifacts = current.artifacts.clone();
        let snapshot = tokio::task::spawn_blocking(move || -> Result<Snapshot, ServiceError> {
            match artifacts {
                Some(a) => {
                    let mut a = (*a).clone();
                    a.set_category(category);
                    store.commit(&mut meta, &a)?;
                    Ok(Snapshot {
                        meta,
                        artifacts: Some(Arc::new(a)),
                    })
                }
                None => {
                    store.save_meta(&meta)?;
                    Ok(Snapshot {
                        meta,
                        artifacts: None,
                    })
                }
            }
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
        Ok(self.publish(snapshot))
    }

    pub fn document(&self, snap: &Snapshot) -> InvestigationDocument {
        let meta = &snap.meta;
        let tweet = self
            .corpora
            .get(&meta.corpus)
            .and_then(|c| c.get(meta.investigative_tweet_id))
            .cloned();
        InvestigationDocument {
            id: meta.id.clone(),
            corpus: meta.corpus.clone(),
            state: meta.state,
            investigative_tweet: tweet,
            config: meta.config.clone(),
            category: meta.category,
            error: meta.error.clone(),
            created_at: meta.created_at,
            updated_at: meta.updated_at,
            artifacts: snap.artifacts.as_ref().map(|a| ArtifactOverview {
                relevant_count: a.relevant.len(),
                originals_count: a.relevant.originals_count,
                retweets_count: a.relevant.retweets_count,
                status: a.relevant.status,
                metrics: a.metrics.clone(),
                crowd_signal: a.crowd_signal,
                summary: a.summary.clone(),
                datasets: dataset_links(&meta.id),
            }),
        }
    }

    /// A dataset document; `keywords` adds one timeline series per term.
    pub fn dataset(
        &self,
        id: &str,
        kind: &str,
        keywords: &[String],
    ) -> Result<Value, ServiceError> {
        let snap = self.snapshot(id)?;
        let kind: DatasetKind = kind
            .parse()
            .map_err(|_| ServiceError::UnknownKind(kind.to_string()))?;
        let artifacts = snap.computed()?;
        let mut doc = artifacts
            .dataset(kind)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        if kind == DatasetKind::Timeline && !keywords.is_empty() {
            let corpus = self.corpus(&snap.meta.corpus)?;
            let records = artifacts.relevant.records(corpus);
            let extra: Vec<_> = keywords
                .iter()
                .filter(|k| !k.trim().is_empty())
                .map(|k| keyword_series(&records, &artifacts.intervals, k))
                .collect();
            if let Some(Value::Array(series)) = doc.get_mut("series") {
                for s in extra {
                    series.push(
                        serde_json::to_value(s)
                            .map_err(|e| ServiceError::Internal(e.to_string()))?,
                    );
                }
            }
        }
        Ok(doc)
    }

    pub fn bin(
        &self,
        id: &str,
        start: &str,
        key: BinSortKey,
        order: SortOrder,
    ) -> Result<Vec<TweetRecord>, ServiceError> {
        let snap = self.snapshot(id)?;
        let artifacts = snap.computed()?;
        let start = rumortrace::model::parse_timestamp(start)
            .ok_or_else(|| ServiceError::BadRequest(format!("invalid timestamp {start:?}")))?;
        let corpus = self.corpus(&snap.meta.corpus)?;
        let records = artifacts.relevant.records(corpus);
        match list_bin(&records, &artifacts.intervals, start, key, order) {
            Ok(rows) => Ok(rows.into_iter().cloned().collect()),
            Err(e) => Err(ServiceError::BadRequest(e.to_string())),
        }
    }

    pub fn stories(&self, view: StoryView) -> Result<Vec<StoryRow>, ServiceError> {
        let mut rows = Vec::new();
        for id in self.store.ids()? {
            let snap = match self.snapshot(&id) {
                Ok(s) => s,
                Err(ServiceError::NotFound(_)) => continue,
                Err(e) => return Err(e),
            };
            let meta = &snap.meta;
            let text = self
                .corpora
                .get(&meta.corpus)
                .and_then(|c| c.get(meta.investigative_tweet_id))
                .map(|t| t.text.clone());
            let metrics = snap.artifacts.as_ref().map(|a| &a.metrics);
            let full = view == StoryView::Full;
            rows.push(StoryRow {
                id: meta.id.clone(),
                state: meta.state,
                investigative_tweet_id: meta.investigative_tweet_id,
                tweet_text: text,
                propagation_level: metrics.map(|m| m.propagation_level),
                skepticism: metrics.map(|m| m.skepticism),
                category: meta.category.unwrap_or_default(),
                summary: full.then(|| snap.artifacts.as_ref().and_then(|a| a.summary.clone())),
                metrics: if full { metrics.cloned() } else { None },
                links: full.then(|| {
                    let mut links: BTreeMap<String, String> = BTreeMap::new();
                    links.insert("self".into(), format!("/investigations/{}", meta.id));
                    if snap.artifacts.is_some() {
                        links.extend(
                            dataset_links(&meta.id)
                                .into_iter()
                                .map(|(k, v)| (k.to_string(), v)),
                        );
                    }
                    links
                }),
            });
        }
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(rows)
    }

    pub fn story_points(&self) -> Result<Vec<rumortrace::metrics::StoryPoint<f64>>, ServiceError> {
        let mut points = Vec::new();
        for id in self.store.ids()? {
            let snap = self.snapshot(&id)?;
            if let Some(a) = &snap.artifacts {
                points.push(rumortrace::metrics::StoryPoint {
                    story_id: id,
                    metrics: a.metrics.clone(),
                });
            }
        }
        Ok(points)
    }

    fn investigative(&self, snap: &Snapshot) -> Result<(&Arc<Corpus>, TweetRecord), ServiceError> {
        let corpus = self.corpus(&snap.meta.corpus)?;
        let tweet = corpus
            .get(snap.meta.investigative_tweet_id)
            .cloned()
            .ok_or(ServiceError::UnknownTweet(snap.meta.investigative_tweet_id))?;
        Ok((corpus, tweet))
    }

    pub fn rate(&self, id: &str, term: &str) -> Result<KeywordRating, ServiceError> {
        if term.trim().is_empty() {
            return Err(ServiceError::BadRequest("term must not be empty".into()));
        }
        let snap = self.snapshot(id)?;
        let (corpus, tweet) = self.investigative(&snap)?;
        Ok(rate_keyword(corpus, term, &tweet, RatingWeights::default()))
    }

    pub fn suggest(&self, id: &str, k: usize) -> Result<Vec<KeywordSuggestion>, ServiceError> {
        let snap = self.snapshot(id)?;
        let (corpus, tweet) = self.investigative(&snap)?;
        Ok(suggest_keywords(corpus, &tweet, &snap.meta.config, k))
    }
}

/// Recompute artifacts for the stored config and category.
pub fn compute(
    corpus: &Corpus,
    meta: &InvestigationMeta,
    lexicon: &NegationLexicon,
    params: &AnalysisParams,
) -> Result<Artifacts, AnalysisError> {
    let mut artifacts = run_pipeline(corpus, &meta.config, lexicon, params)?;
    if let Some(c) = meta.category {
        artifacts.set_category(c);
    }
    Ok(artifacts)
}

/// Apply a merge patch to `config`. The patch may be the bare object or
/// wrapped as `{"patch": {...}}`.
pub fn merged_config(
    config: &InvestigationConfig,
    patch: &Value,
) -> Result<InvestigationConfig, ServiceError> {
    let patch = match patch {
        Value::Object(m) if m.len() == 1 && m.contains_key("patch") => &m["patch"],
        p => p,
    };
    if !patch.is_object() {
        return Err(ServiceError::InvalidConfig(ConfigError::Malformed(
            "patch must be an object".into(),
        )));
    }
    let mut doc =
        serde_json::to_value(config).map_err(|e| ServiceError::Internal(e.to_string()))?;
    json_patch::merge(&mut doc, patch);
    let next: InvestigationConfig = serde_json::from_value(doc)
        .map_err(|e| ServiceError::InvalidConfig(ConfigError::Malformed(e.to_string())))?;
    if next.investigative_tweet_id != config.investigative_tweet_id {
        return Err(ServiceError::InvalidConfig(
            ConfigError::InvestigativeTweetChanged,
        ));
    }
    Ok(next)
}
