//! JSON-over-HTTP routes. Every error body is `{"error": "..."}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use rumortrace::metrics::StoryCategory;
use rumortrace::timeline::{BinSortKey, SortOrder};
use rumortrace::{DatasetKind, TweetId};

use crate::service::{Service, ServiceError, StoryView};

impl ServiceError {
    fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_)
            | ServiceError::UnknownCorpus(_)
            | ServiceError::UnknownTweet(_) => StatusCode::NOT_FOUND,
            ServiceError::CorpusRequired(_)
            | ServiceError::UnknownKind(_)
            | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::InvalidConfig(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::NotComputed { .. } => StatusCode::CONFLICT,
            ServiceError::Store(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let mut body = json!({ "error": self.to_string() });
        if let ServiceError::UnknownKind(_) = self {
            body["valid_kinds"] = json!(DatasetKind::ALL
                .iter()
                .map(|k| k.as_str())
                .collect::<Vec<_>>());
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ServiceError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ServiceError::BadRequest(format!("invalid request body: {e}")))
}

fn query_enum<T: DeserializeOwned>(
    q: &HashMap<String, String>,
    name: &str,
) -> ApiResult<Option<T>> {
    q.get(name)
        .map(|v| {
            serde_json::from_value(Value::String(v.clone()))
                .map_err(|_| ServiceError::BadRequest(format!("invalid {name} {v:?}")))
        })
        .transpose()
}

fn required<'q>(q: &'q HashMap<String, String>, name: &str) -> ApiResult<&'q str> {
    q.get(name)
        .map(String::as_str)
        .ok_or_else(|| ServiceError::BadRequest(format!("missing query parameter {name:?}")))
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/investigations", post(create))
        .route("/investigations/{id}", get(investigation))
        .route("/investigations/{id}/config", put(refine))
        .route("/investigations/{id}/category", put(category))
        .route("/investigations/{id}/datasets/{kind}", get(dataset))
        .route("/investigations/{id}/bins/{start}", get(bin))
        .route("/stories", get(stories))
        .route("/keywords/rate", get(rate))
        .route("/keywords/suggest", get(suggest))
        .fallback(|| async {
            (
                StatusCode::NOT_FOUND,
                Json(json!({ "error": "no such route" })),
            )
        })
        .with_state(service)
}

#[derive(Deserialize)]
struct CreateRequest {
    corpus: Option<String>,
    tweet_id: TweetId,
}

async fn create(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<Response> {
    let req: CreateRequest = parse_body(&body)?;
    let snap = svc.create(req.corpus.as_deref(), req.tweet_id)?;
    let location = format!("/investigations/{}", snap.meta.id);
    Ok((
        StatusCode::CREATED,
        [(header::LOCATION, location)],
        Json(svc.document(&snap)),
    )
        .into_response())
}

async fn investigation(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let snap = svc.snapshot(&id)?;
    Ok(Json(svc.document(&snap)).into_response())
}

async fn refine(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let patch: Value = parse_body(&body)?;
    let snap = svc.refine(&id, &patch).await?;
    Ok(Json(svc.document(&snap)).into_response())
}

#[derive(Deserialize)]
struct CategoryRequest {
    category: StoryCategory,
}

async fn category(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: CategoryRequest = parse_body(&body)?;
    let snap = svc.set_category(&id, req.category).await?;
    Ok(Json(svc.document(&snap)).into_response())
}

async fn dataset(
    State(svc): State<Arc<Service>>,
    Path((id, kind)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let keywords: Vec<String> = q
        .get("keywords")
        .map(|k| {
            k.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();
    Ok(Json(svc.dataset(&id, &kind, &keywords)?).into_response())
}

async fn bin(
    State(svc): State<Arc<Service>>,
    Path((id, start)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let key = query_enum(&q, "sort")?.unwrap_or(BinSortKey::Retweets);
    let order = query_enum(&q, "order")?.unwrap_or(SortOrder::Desc);
    Ok(Json(svc.bin(&id, &start, key, order)?).into_response())
}

async fn stories(
    State(svc): State<Arc<Service>>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let view = query_enum(&q, "view")?.unwrap_or(StoryView::Condensed);
    Ok(Json(svc.stories(view)?).into_response())
}

async fn rate(
    State(svc): State<Arc<Service>>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let rating = svc.rate(required(&q, "investigation")?, required(&q, "term")?)?;
    Ok(Json(rating).into_response())
}

async fn suggest(
    State(svc): State<Arc<Service>>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let k = match q.get("k") {
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| ServiceError::BadRequest(format!("invalid k {v:?}")))?,
        None => 10,
    };
    Ok(Json(svc.suggest(required(&q, "investigation")?, k)?).into_response())
}
