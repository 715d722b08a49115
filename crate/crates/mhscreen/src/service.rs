//! Review queue HTTP API under `/api/v1`, plus optional static assets.

use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, RawQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mhscreen_core::explain::ChatBackend;
use mhscreen_core::features::TfidfModel;
use mhscreen_core::models::LinearClassifier;
use mhscreen_core::review::{
    DecisionAction, Flag, FlagStatus, ModeratorDecision, QueueOrder, QueueQuery, ReviewError, ScreenError, Screener,
    Thresholds,
};
use mhscreen_core::ClassLabel;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::store::{EventStore, StoreError};

pub const MAX_PAGE: usize = 1000;

pub struct LoadedModel {
    pub classifier: LinearClassifier,
    pub vectorizer: TfidfModel,
    pub version: String,
}

pub struct AppState {
    pub model: Option<LoadedModel>,
    pub store: Mutex<EventStore>,
    pub llm: Box<dyn ChatBackend + Send + Sync>,
    pub thresholds: Thresholds,
}

impl AppState {
    fn store(&self) -> MutexGuard<'_, EventStore> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"error": self.code, "message": self.message});
        if let Some(d) = self.details {
            body["details"] = d;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        match &e {
            ReviewError::UnknownFlag(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string()).with_details(json!({"id": id}))
            }
            ReviewError::AlreadyDecided { id, status } => {
                ApiError::new(StatusCode::CONFLICT, "already_decided", e.to_string())
                    .with_details(json!({"id": id, "status": status}))
            }
            ReviewError::MissingNewLabel | ReviewError::UnexpectedNewLabel | ReviewError::SameLabel(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_decision", e.to_string())
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Rejected(r) => r.into(),
            other => {
                tracing::error!(error = %other, "event store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "event store failure")
            }
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyRequest {
    text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionRequest {
    action: DecisionAction,
    #[serde(default)]
    new_label: Option<ClassLabel>,
    moderator_id: String,
    #[serde(default)]
    note: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

async fn classify(State(app): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Flag>), ApiError> {
    let req: ClassifyRequest = parse_body(&body)?;
    if app.model.is_none() {
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "model_unavailable",
            "no model is loaded",
        ));
    }
    // Screening may wait on the LLM and the commit syncs to disk.
    let flag = tokio::task::spawn_blocking(move || -> Result<Flag, ApiError> {
        let m = app.model.as_ref().expect("checked above");
        let screener = Screener {
            thresholds: app.thresholds,
            ..Screener::new(&m.classifier, &m.vectorizer, app.llm.as_ref())
        };
        let flag = screener.screen(String::new(), &req.text, now()).map_err(|e| match e {
            ScreenError::EmptyText => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_text", e.to_string()),
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        })?;
        let mut store = app.store();
        Ok(store.record_flag(flag)?.clone())
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok((StatusCode::CREATED, Json(flag)))
}

fn parse_queue_query(raw: Option<&str>) -> Result<QueueQuery, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", m);
    let mut q = QueueQuery::default();
    for pair in raw.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        match k {
            "status" => {
                for s in v.split(',').filter(|s| !s.is_empty()) {
                    q.statuses
                        .push(FlagStatus::parse(s).ok_or_else(|| bad(format!("unknown status {s:?}")))?);
                }
            }
            "order" => {
                q.order = match v {
                    "" | "created_at" => QueueOrder::CreatedAt,
                    "urgency" | "urgency_then_created_at" => QueueOrder::UrgencyThenCreatedAt,
                    _ => return Err(bad(format!("unknown order {v:?}"))),
                }
            }
            "offset" => q.offset = v.parse().map_err(|_| bad(format!("bad offset {v:?}")))?,
            "limit" => {
                q.limit = v.parse().map_err(|_| bad(format!("bad limit {v:?}")))?;
                if q.limit > MAX_PAGE {
                    return Err(bad(format!("limit must be at most {MAX_PAGE}")));
                }
            }
            _ => return Err(bad(format!("unknown parameter {k:?}"))),
        }
    }
    Ok(q)
}

async fn queue(State(app): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Result<Json<Value>, ApiError> {
    let q = parse_queue_query(raw.as_deref())?;
    let page = app.store().state().list_queue(&q);
    Ok(Json(json!({"flags": page.flags, "total": page.total})))
}

async fn get_flag(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Flag>, ApiError> {
    app.store()
        .state()
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ReviewError::UnknownFlag(id).into())
}

async fn decide(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Flag>, ApiError> {
    let req: DecisionRequest = parse_body(&body)?;
    if req.moderator_id.trim().is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_decision",
            "moderator_id is required",
        ));
    }
    let decision = ModeratorDecision {
        flag_id: id,
        action: req.action,
        new_label: req.new_label,
        moderator_id: req.moderator_id,
        decided_at: now(),
        note: req.note,
    };
    let flag = tokio::task::spawn_blocking(move || -> Result<Flag, ApiError> {
        let mut store = app.store();
        Ok(store.record_decision(decision)?.clone())
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(flag))
}

async fn health(State(app): State<Arc<AppState>>) -> Json<Value> {
    match &app.model {
        Some(m) => Json(json!({"status": "ok", "model_version": m.version})),
        None => Json(json!({"status": "no_model", "model_version": null})),
    }
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(app: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/classify", post(classify))
        .route("/queue", get(queue))
        .route("/flags/{id}", get(get_flag))
        .route("/flags/{id}/decision", post(decide))
        .route("/health", get(health))
        .fallback(api_not_found)
        .with_state(app);
    let root = Router::new().nest("/api/v1", api);
    match static_dir {
        Some(dir) => root.fallback_service(ServeDir::new(dir)),
        None => root,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
