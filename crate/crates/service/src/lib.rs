//! Investigation store, HTTP API and command-line front end for rumortrace.

pub mod http;
pub mod service;
pub mod store;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context};
use rumortrace::{load_corpus, Corpus};

/// Corpus name used in the API: the file name without its extension.
pub fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_corpora(paths: &[impl AsRef<Path>]) -> anyhow::Result<BTreeMap<String, Arc<Corpus>>> {
    let mut out = BTreeMap::new();
    for path in paths {
        let path = path.as_ref();
        let (corpus, report) =
            load_corpus(path).with_context(|| format!("loading {}", path.display()))?;
        if !report.rejected.is_empty() {
            tracing::warn!(path = %path.display(), rejected = report.rejected.len(), reasons = ?report.by_reason(), "skipped invalid records");
        }
        tracing::info!(path = %path.display(), tweets = corpus.len(), "corpus loaded");
        let name = corpus_name(path);
        if out.insert(name.clone(), Arc::new(corpus)).is_some() {
            bail!("two corpora are named {name:?}");
        }
    }
    Ok(out)
}
