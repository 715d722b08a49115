mod common;

use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use mhscreen::llm::DisabledClient;
use mhscreen::service::{router, AppState, LoadedModel};
use mhscreen::store::EventStore;
use mhscreen_core::explain::{ChatBackend, ChatError, DISCLAIMER};
use mhscreen_core::review::{Screener, Thresholds};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Echo(&'static str);

impl ChatBackend for Echo {
    fn enabled(&self) -> bool {
        true
    }
    fn complete(&self, _prompt: &str) -> Result<String, ChatError> {
        Ok(self.0.to_string())
    }
}

struct TimesOut;

impl ChatBackend for TimesOut {
    fn enabled(&self) -> bool {
        true
    }
    fn complete(&self, _prompt: &str) -> Result<String, ChatError> {
        Err(ChatError::Timeout)
    }
}

fn state(dir: &Path, with_model: bool, llm: Box<dyn ChatBackend + Send + Sync>) -> Arc<AppState> {
    let (store, _) = EventStore::open(&dir.join("events.jsonl"), 100).unwrap();
    let model = with_model.then(|| {
        let (classifier, vectorizer) = common::tiny_model();
        LoadedModel {
            classifier,
            vectorizer,
            version: "test".into(),
        }
    });
    Arc::new(AppState {
        model,
        store: Mutex::new(store),
        llm,
        thresholds: Thresholds::default(),
    })
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

fn assert_error_body(v: &Value, code: &str) {
    assert_eq!(v["error"], code, "{v}");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[tokio::test]
async fn classify_then_decide_then_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), None);

    let (s, flag) = call(
        &app,
        "POST",
        "/api/v1/classify",
        Some(json!({"text": "Goodbye goodbye, at night"})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(flag["id"], "flag-000001");
    assert_eq!(flag["status"], "pending");
    assert_eq!(flag["predicted"], "suicide");
    assert_eq!(flag["disclaimer"], DISCLAIMER);
    assert_eq!(flag["narrative_source"], "template_fallback");

    let (s, decided) = call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "confirm", "moderator_id": "m1"})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(decided["status"], "confirmed");
    assert_eq!(decided["decision"]["moderator_id"], "m1");
    assert_eq!(decided["disclaimer"], DISCLAIMER);

    let (s, err) = call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "dismiss", "moderator_id": "m2"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_body(&err, "already_decided");
    assert_eq!(err["details"]["status"], "confirmed");

    let (s, again) = call(&app, "GET", "/api/v1/flags/flag-000001", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(again["status"], "confirmed");
    assert_eq!(again["decision"]["action"], "confirm");
}

#[tokio::test]
async fn flag_matches_direct_screening() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(dir.path(), true, Box::new(Echo("Because of the word manic.")));
    let app = router(st.clone(), None);
    let text = "So manic, MANIC again!";
    let (_, got) = call(&app, "POST", "/api/v1/classify", Some(json!({"text": text}))).await;

    let m = st.model.as_ref().unwrap();
    let echo = Echo("Because of the word manic.");
    let want = Screener::new(&m.classifier, &m.vectorizer, &echo)
        .screen("flag-000001".into(), text, got["created_at"].as_str().unwrap().into())
        .unwrap();
    assert_eq!(got, serde_json::to_value(&want).unwrap());
    assert_eq!(got["narrative"], "Because of the word manic.");
    assert_eq!(got["narrative_source"], "llm");
}

#[tokio::test]
async fn llm_timeout_still_creates_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), true, Box::new(TimesOut)), None);
    let (s, flag) = call(&app, "POST", "/api/v1/classify", Some(json!({"text": "panic panic"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(flag["narrative_source"], "template_fallback");
    assert!(flag["narrative"].as_str().unwrap().starts_with("Flagged as anxiety"));
}

#[tokio::test]
async fn rejected_inputs_use_the_error_shape() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), None);

    let (s, e) = call(&app, "POST", "/api/v1/classify", Some(json!({"text": " !!! "}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_body(&e, "empty_text");
    let (_, q) = call(&app, "GET", "/api/v1/queue", None).await;
    assert_eq!(q["total"], 0);

    let (s, e) = call(&app, "POST", "/api/v1/classify", Some(json!({"txt": "x"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_body(&e, "invalid_body");

    let (s, e) = call(&app, "GET", "/api/v1/flags/flag-000042", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_body(&e, "not_found");

    call(&app, "POST", "/api/v1/classify", Some(json!({"text": "party today"}))).await;
    let (s, e) = call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "recategorize", "moderator_id": "m"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_body(&e, "invalid_decision");
    let (s, _) = call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "recategorize", "new_label": "non_suicide", "moderator_id": "m"})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, ok) = call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "recategorize", "new_label": "stress", "moderator_id": "m", "note": "work"})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ok["status"], "recategorized");

    let (s, e) = call(&app, "GET", "/api/v1/queue?order=sideways", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_body(&e, "invalid_query");

    let (s, e) = call(&app, "GET", "/api/v1/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_body(&e, "not_found");
}

#[tokio::test]
async fn queue_orders_urgent_first_and_pages() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), None);
    for text in ["party today", "goodbye goodbye at night", "church again"] {
        call(&app, "POST", "/api/v1/classify", Some(json!({"text": text}))).await;
    }
    let (_, by_time) = call(&app, "GET", "/api/v1/queue", None).await;
    let ids: Vec<&str> = by_time["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["flag-000001", "flag-000002", "flag-000003"]);

    let (_, urgent) = call(&app, "GET", "/api/v1/queue?order=urgency&status=pending", None).await;
    let flags = urgent["flags"].as_array().unwrap();
    assert_eq!(flags[0]["id"], "flag-000002");
    assert_eq!(flags[0]["urgency"], "urgent");
    assert!(flags.iter().all(|f| f["disclaimer"] == DISCLAIMER));

    let (_, page) = call(&app, "GET", "/api/v1/queue?offset=2&limit=5", None).await;
    assert_eq!(page["total"], 3);
    assert_eq!(page["flags"].as_array().unwrap().len(), 1);
    let (_, past) = call(&app, "GET", "/api/v1/queue?offset=10", None).await;
    assert_eq!(past["flags"], json!([]));

    call(
        &app,
        "POST",
        "/api/v1/flags/flag-000003/decision",
        Some(json!({"action": "dismiss", "moderator_id": "m"})),
    )
    .await;
    let (_, dismissed) = call(&app, "GET", "/api/v1/queue?status=dismissed,confirmed", None).await;
    assert_eq!(dismissed["total"], 1);
}

#[tokio::test]
async fn no_model_means_503_and_health_says_so() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), false, Box::new(DisabledClient)), None);
    let (s, e) = call(&app, "POST", "/api/v1/classify", Some(json!({"text": "hello"}))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_error_body(&e, "model_unavailable");
    let (s, h) = call(&app, "GET", "/api/v1/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h["model_version"], Value::Null);

    let app = router(
        state(tempfile::tempdir().unwrap().path(), true, Box::new(DisabledClient)),
        None,
    );
    let (_, h) = call(&app, "GET", "/api/v1/health", None).await;
    assert_eq!(h, json!({"status": "ok", "model_version": "test"}));
}

#[tokio::test]
async fn static_assets_are_served_at_root() {
    let dir = tempfile::tempdir().unwrap();
    let assets = dir.path().join("dist");
    std::fs::create_dir(&assets).unwrap();
    std::fs::write(assets.join("index.html"), "<h1>queue</h1>").unwrap();
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), Some(&assets));
    let (s, body) = call(&app, "GET", "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, "<h1>queue</h1>");
    let (s, h) = call(&app, "GET", "/api/v1/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h["status"], "ok");
}

#[tokio::test]
async fn state_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), None);
    call(&app, "POST", "/api/v1/classify", Some(json!({"text": "bpd again"}))).await;
    call(
        &app,
        "POST",
        "/api/v1/flags/flag-000001/decision",
        Some(json!({"action": "confirm", "moderator_id": "m"})),
    )
    .await;
    let (_, before) = call(&app, "GET", "/api/v1/queue", None).await;
    drop(app);
    let app = router(state(dir.path(), true, Box::new(DisabledClient)), None);
    let (_, after) = call(&app, "GET", "/api/v1/queue", None).await;
    assert_eq!(before, after);
}
