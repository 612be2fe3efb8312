use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use rumortrace::metrics::{scatter_export, write_scatter_csv};
use rumortrace::synthetic::{plane_story, PlaneStoryParams};
use rumortrace::{
    load_corpus, run_pipeline, AnalysisParams, DatasetKind, InvestigationConfig, NegationLexicon,
    TweetId,
};
use rumortrace_service::service::Service;
use rumortrace_service::store::Store;
use rumortrace_service::{http, load_corpora};

#[derive(Parser)]
#[command(
    name = "rumortrace",
    version,
    about = "Investigate how a story spread on a tweet corpus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one investigation and print its summary.
    Investigate {
        /// Corpus file, one tweet JSON object per line.
        #[arg(long)]
        corpus: PathBuf,
        /// Investigative tweet id.
        #[arg(long)]
        tweet: TweetId,
        /// Investigation config (JSON). `investigative_tweet_id` may be omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write artifacts.json, one file per dataset and summary.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only produce the summary.
        #[arg(long)]
        summary_only: bool,
        /// Base negation lexicon, one term per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        /// Corpus files; each is addressed by its file stem.
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Export propagation versus skepticism of every computed story as CSV.
    Scatter {
        #[arg(long)]
        store: PathBuf,
        /// Output file, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic single-story corpus and its config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3_800)]
        noise: usize,
        /// Where to write the story's config (JSON).
        #[arg(long)]
        config_out: Option<PathBuf>,
        /// Where to write the planted answers (JSON).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn lexicon(path: Option<&Path>) -> Result<NegationLexicon> {
    match path {
        Some(p) => {
            NegationLexicon::from_file(p).with_context(|| format!("reading {}", p.display()))
        }
        None => Ok(NegationLexicon::default()),
    }
}

fn read_config(path: Option<&Path>, tweet: TweetId) -> Result<InvestigationConfig> {
    let Some(path) = path else {
        return Ok(InvestigationConfig::new(tweet));
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let Some(obj) = doc.as_object_mut() else {
        bail!("{}: config must be a JSON object", path.display());
    };
    let tweet_value = Value::String(tweet.to_string());
    if let Some(existing) = obj.get("investigative_tweet_id") {
        let same: Option<TweetId> = serde_json::from_value(existing.clone()).ok();
        if same != Some(tweet) {
            bail!(
                "{}: investigative_tweet_id {existing} does not match --tweet {tweet}",
                path.display()
            );
        }
    }
    obj.insert("investigative_tweet_id".into(), tweet_value);
    serde_json::from_value(doc).with_context(|| format!("invalid config in {}", path.display()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn investigate(
    corpus: &Path,
    tweet: TweetId,
    config: Option<&Path>,
    out: Option<&Path>,
    summary_only: bool,
    lexicon_path: Option<&Path>,
) -> Result<()> {
    let (corpus, report) =
        load_corpus(corpus).with_context(|| format!("loading {}", corpus.display()))?;
    if !report.rejected.is_empty() {
        eprintln!("skipped {} invalid records", report.rejected.len());
    }
    let config = read_config(config, tweet)?;
    let artifacts = run_pipeline(
        &corpus,
        &config,
        &lexicon(lexicon_path)?,
        &AnalysisParams::default(),
    )?;
    let text = match &artifacts.summary {
        Some(s) => s.render_text(),
        None => "Empty story: no tweet matches the config.\n".to_string(),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_file(dir, "summary.txt", text.as_bytes())?;
        let kinds: &[DatasetKind] = if summary_only {
            &[DatasetKind::Summary]
        } else {
            &DatasetKind::ALL
        };
        for kind in kinds {
            let doc = serde_json::to_vec_pretty(&artifacts.dataset(*kind)?)?;
            write_file(dir, &format!("{kind}.json"), &doc)?;
        }
        if !summary_only {
            write_file(dir, "artifacts.json", &artifacts.to_json()?)?;
        }
    }
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

async fn serve(
    corpora: &[PathBuf],
    store: &Path,
    listen: SocketAddr,
    lexicon_path: Option<&Path>,
) -> Result<()> {
    let corpora = load_corpora(corpora)?;
    let store = Store::open(store)?;
    let service = Arc::new(Service::new(
        corpora,
        store,
        lexicon(lexicon_path)?,
        AnalysisParams::default(),
    ));
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .with_context(|| format!("binding {listen}"))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, http::router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn scatter(store: &Path, out: &Path) -> Result<()> {
    let service = Service::new(
        Default::default(),
        Store::open(store)?,
        NegationLexicon::default(),
        AnalysisParams::default(),
    );
    let rows = scatter_export(&service.story_points()?);
    if out == Path::new("-") {
        write_scatter_csv(&rows, io::stdout().lock())?;
    } else {
        let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
        write_scatter_csv(&rows, io::BufWriter::new(file))?;
    }
    Ok(())
}

fn synth(
    out: &Path,
    seed: u64,
    noise: usize,
    config_out: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<()> {
    let story = plane_story(&PlaneStoryParams {
        seed,
        noise_tweets: noise,
        ..Default::default()
    });
    let mut w = io::BufWriter::new(
        fs::File::create(out).with_context(|| format!("creating {}", out.display()))?,
    );
    for r in &story.records {
        writeln!(w, "{}", r.to_json_line())?;
    }
    w.flush()?;
    if let Some(p) = config_out {
        fs::write(p, serde_json::to_vec_pretty(&story.manifest.config)?)?;
    }
    if let Some(p) = manifest {
        fs::write(p, serde_json::to_vec_pretty(&story.manifest)?)?;
    }
    eprintln!(
        "wrote {} tweets; investigative tweet {}",
        story.records.len(),
        story.manifest.config.investigative_tweet_id
    );
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    match Cli::parse().command {
        Command::Investigate {
            corpus,
            tweet,
            config,
            out,
            summary_only,
            lexicon,
        } => investigate(
            &corpus,
            tweet,
            config.as_deref(),
            out.as_deref(),
            summary_only,
            lexicon.as_deref(),
        ),
        Command::Serve {
            corpus,
            store,
            listen,
            lexicon,
        } => tokio::runtime::Runtime::new()?.block_on(serve(
            &corpus,
            &store,
            listen,
            lexicon.as_deref(),
        )),
        Command::Scatter { store, out } => scatter(&store, &out),
        Command::Synth {
            out,
            seed,
            noise,
            config_out,
            manifest,
        } => synth(
            &out,
            seed,
            noise,
            config_out.as_deref(),
            manifest.as_deref(),
        ),
    }
}
