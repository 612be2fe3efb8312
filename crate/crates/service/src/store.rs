//! One directory per investigation:
//!
//! ```text
//! <root>/<id>/investigation.json      metadata and current config
//! <root>/<id>/gen-000007/config.json  config the artifacts were computed from
//! <root>/<id>/gen-000007/artifacts.json
//! ```
//!
//! A refinement writes a fresh generation directory first and only then
//! swaps `investigation.json` (write to a temp file, fsync, rename). A crash
//! at any point leaves the previous generation referenced and readable.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use rumortrace::metrics::StoryCategory;
use rumortrace::{Artifacts, InvestigationConfig, TweetId};

const META: &str = "investigation.json";
const CONFIG: &str = "config.json";
const ARTIFACTS: &str = "artifacts.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvestigationState {
    Draft,
    Computed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestigationMeta {
    pub id: String,
    pub corpus: String,
    pub investigative_tweet_id: TweetId,
    pub state: InvestigationState,
    pub config: InvestigationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<StoryCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    /// Generation holding the artifacts; set iff `state` is computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid investigation id {0:?}")]
    BadId(String),
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_at(path: &Path) -> impl FnOnce(serde_json::Error) -> StoreError + '_ {
    move |source| StoreError::Json {
        path: path.to_path_buf(),
        source,
    }
}

fn write_durable(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut f = File::create(path).map_err(io_at(path))?;
    f.write_all(bytes).map_err(io_at(path))?;
    f.sync_all().map_err(io_at(path))
}

fn sync_dir(dir: &Path) -> Result<(), StoreError> {
    // directory fsync is not supported everywhere; a failure here only
    // weakens durability, not atomicity
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

fn gen_name(generation: u64) -> String {
    format!("gen-{generation:06}")
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_at(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        let ok = !id.is_empty()
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(StoreError::BadId(id.to_string()));
        }
        Ok(self.root.join(id))
    }

    /// Ids of every stored investigation, sorted.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_at(&self.root))? {
            let entry = entry.map_err(io_at(&self.root))?;
            if entry.path().join(META).is_file() {
                if let Some(name) = entry.file_name().to_str() {
                    ids.push(name.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load_meta(&self, id: &str) -> Result<Option<InvestigationMeta>, StoreError> {
        let path = self.dir(id)?.join(META);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(json_at(&path)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_at(&path)(e)),
        }
    }

    pub fn load_artifacts(
        &self,
        meta: &InvestigationMeta,
    ) -> Result<Option<Artifacts>, StoreError> {
        let Some(generation) = meta.generation else {
            return Ok(None);
        };
        let path = self
            .dir(&meta.id)?
            .join(gen_name(generation))
            .join(ARTIFACTS);
        let bytes = fs::read(&path).map_err(io_at(&path))?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(json_at(&path))
    }

    /// Raw bytes of the current artifacts file.
    pub fn artifact_bytes(&self, meta: &InvestigationMeta) -> Result<Option<Vec<u8>>, StoreError> {
        let Some(generation) = meta.generation else {
            return Ok(None);
        };
        let path = self
            .dir(&meta.id)?
            .join(gen_name(generation))
            .join(ARTIFACTS);
        fs::read(&path).map(Some).map_err(io_at(&path))
    }

    fn swap_meta(&self, meta: &InvestigationMeta) -> Result<(), StoreError> {
        let dir = self.dir(&meta.id)?;
        fs::create_dir_all(&dir).map_err(io_at(&dir))?;
        let tmp = dir.join(format!("{META}.tmp"));
        let bytes = serde_json::to_vec_pretty(meta).map_err(json_at(&tmp))?;
        write_durable(&tmp, &bytes)?;
        let path = dir.join(META);
        fs::rename(&tmp, &path).map_err(io_at(&path))?;
        sync_dir(&dir)
    }

    /// Persist metadata only (drafts, errors, failed refinements).
    pub fn save_meta(&self, meta: &InvestigationMeta) -> Result<(), StoreError> {
        self.swap_meta(meta)
    }

    /// Write `artifacts` as a new generation and point `meta` at it. `meta`
    /// is updated in place only once the swap has happened.
    pub fn commit(
        &self,
        meta: &mut InvestigationMeta,
        artifacts: &Artifacts,
    ) -> Result<(), StoreError> {
        let dir = self.dir(&meta.id)?;
        let generation = meta.generation.map_or(1, |g| g + 1);
        let gen_dir = dir.join(gen_name(generation));
        if gen_dir.exists() {
            // leftovers of an interrupted commit
            fs::remove_dir_all(&gen_dir).map_err(io_at(&gen_dir))?;
        }
        fs::create_dir_all(&gen_dir).map_err(io_at(&gen_dir))?;
        let config_path = gen_dir.join(CONFIG);
        write_durable(
            &config_path,
            &serde_json::to_vec_pretty(&meta.config).map_err(json_at(&config_path))?,
        )?;
        let art_path = gen_dir.join(ARTIFACTS);
        write_durable(&art_path, &artifacts.to_json().map_err(json_at(&art_path))?)?;
        sync_dir(&gen_dir)?;

        let mut next = meta.clone();
        next.generation = Some(generation);
        next.state = InvestigationState::Computed;
        next.error = None;
        self.swap_meta(&next)?;
        *meta = next;
        self.prune(&dir, generation);
        Ok(())
    }

    fn prune(&self, dir: &Path, keep: u64) {
        let Ok(entries) = fs::read_dir(dir) else {
            return;
        };
        for entry in entries.flatten() {
            let name = entry.file_name();
            let Some(n) = name
                .to_str()
                .and_then(|n| n.strip_prefix("gen-"))
                .and_then(|n| n.parse::<u64>().ok())
            else {
                continue;
            };
            if n != keep {
                if let Err(e) = fs::remove_dir_all(entry.path()) {
                    tracing::warn!(path = %entry.path().display(), error = %e, "could not prune old generation");
                }
            }
        }
    }
}
