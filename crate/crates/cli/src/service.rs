//! HTTP session service for the playground.
//!
//! Each session owns a runtime state behind its own lock, so events for one
//! session apply in arrival order while sessions proceed independently.
//! A background ticker turns wall-clock time into `advance` calls; the
//! runtime's gates decide whether a clock actually moves.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use animflow::model::diagnostic::Diagnostic;
use animflow::model::spec::parse_spec;
use animflow::{encode_frame, Chart, ChartError, DataTable, Event, RuntimeState};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};

pub const DEFAULT_PORT: u16 = 7878;
pub const DEFAULT_TICK_MS: u64 = 16;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Directory that relative data urls resolve against.
    pub base_dir: PathBuf,
    /// Spec used when a create request carries none.
    pub default_spec: Option<String>,
    /// Auto-play tick; zero disables the ticker.
    pub tick_ms: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            base_dir: PathBuf::from("."),
            default_spec: None,
            tick_ms: DEFAULT_TICK_MS,
        }
    }
}

type Session = Arc<Mutex<RuntimeState>>;

struct Inner {
    sessions: Mutex<BTreeMap<u64, Session>>,
    next_id: AtomicU64,
    config: ServiceConfig,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState(Arc::new(Inner {
            sessions: Mutex::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            config,
        }))
    }

    fn session(&self, id: u64) -> Result<Session, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session table lock")
            .get(&id)
            .cloned()
            .ok_or(ApiError::NotFound(id))
    }

    /// Advances every session by `dt` ms.
    pub fn tick(&self, dt: f64) {
        let sessions: Vec<Session> = self
            .0
            .sessions
            .lock()
            .expect("session table lock")
            .values()
            .cloned()
            .collect();
        for s in sessions {
            let mut st = s.lock().expect("session lock");
            // dt is positive and finite, so advance cannot fail.
            let _ = st.advance(dt);
        }
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.lock().expect("session table lock").len()
    }
}

#[derive(Debug)]
enum ApiError {
    BadRequest(String, Vec<Diagnostic>),
    NotFound(u64),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::BadRequest(error, diagnostics) => (
                StatusCode::BAD_REQUEST,
                Json(json!({"error": error, "diagnostics": diagnostics})),
            )
                .into_response(),
            ApiError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                Json(json!({"error": format!("no session {id}")})),
            )
                .into_response(),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::BadRequest("malformed request".into(), vec![Diagnostic::error("", e.to_string())]))
}

fn chart_error(e: ChartError) -> ApiError {
    ApiError::BadRequest(e.to_string(), e.diagnostics())
}

#[derive(Deserialize)]
struct CreateRequest {
    #[serde(default)]
    spec: Option<JsonValue>,
    #[serde(default)]
    data: Option<Vec<JsonValue>>,
}

#[derive(Deserialize)]
struct EventRequest {
    event: Event,
    #[serde(default)]
    seq: Option<u64>,
}

#[derive(Deserialize)]
struct AdvanceRequest {
    dt_ms: f64,
}

fn frame_response(st: &RuntimeState, seq: Option<u64>) -> Json<JsonValue> {
    let mut body = json!({"frame": encode_frame(st).to_json()});
    if let Some(seq) = seq {
        body["seq"] = json!(seq);
    }
    Json(body)
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Json<JsonValue>, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let text = match req.spec {
        Some(JsonValue::String(s)) => s,
        Some(v) => v.to_string(),
        None => app.0.config.default_spec.clone().ok_or_else(|| {
            ApiError::BadRequest(
                "request has no spec".into(),
                vec![Diagnostic::error("/spec", "required")],
            )
        })?,
    };
    let chart = match req.data {
        Some(rows) => {
            let parsed = parse_spec(&text).map_err(|e| chart_error(e.into()))?;
            let data = match &parsed.spec.data {
                animflow::model::spec::DataSource::Inline(t) => t.clone(),
                _ => DataTable::from_json_rows(&rows).map_err(|e| chart_error(e.into()))?,
            };
            Chart::build(&parsed.spec, data).map_err(chart_error)?
        }
        None => Chart::from_text(&text, Some(&app.0.config.base_dir), None).map_err(chart_error)?,
    };
    let state = chart.start().map_err(|e| chart_error(e.into()))?;
    let id = app.0.next_id.fetch_add(1, Ordering::SeqCst);
    let body = json!({
        "session_id": id,
        "widgets": state.widgets(),
        "cycle_ms": state.cycle_ms(),
    });
    app.0
        .sessions
        .lock()
        .expect("session table lock")
        .insert(id, Arc::new(Mutex::new(state)));
    Ok(Json(body))
}

async fn post_event(
    State(app): State<AppState>,
    Path(id): Path<u64>,
    body: Bytes,
) -> Result<Json<JsonValue>, ApiError> {
    let req: EventRequest = parse_body(&body)?;
    let session = app.session(id)?;
    let mut st = session.lock().expect("session lock");
    st.inject_event(&req.event)
        .map_err(|e| ApiError::BadRequest(e.to_string(), vec![Diagnostic::error("/event", e.to_string())]))?;
    Ok(frame_response(&st, req.seq))
}

async fn post_advance(
    State(app): State<AppState>,
    Path(id): Path<u64>,
    body: Bytes,
) -> Result<Json<JsonValue>, ApiError> {
    let req: AdvanceRequest = parse_body(&body)?;
    let session = app.session(id)?;
    let mut st = session.lock().expect("session lock");
    st.advance(req.dt_ms)
        .map_err(|e| ApiError::BadRequest(e.to_string(), vec![Diagnostic::error("/dt_ms", e.to_string())]))?;
    Ok(frame_response(&st, None))
}

async fn get_frame(State(app): State<AppState>, Path(id): Path<u64>) -> Result<Json<JsonValue>, ApiError> {
    let session = app.session(id)?;
    let st = session.lock().expect("session lock");
    Ok(frame_response(&st, None))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<u64>) -> Result<StatusCode, ApiError> {
    match app.0.sessions.lock().expect("session table lock").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(id)),
    }
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/advance", post(post_advance))
        .route("/sessions/{id}/frame", get(get_frame))
        .with_state(app)
}

/// Serves until the process is stopped.
pub async fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let tick_ms = config.tick_ms;
    let app = AppState::new(config);
    if tick_ms > 0 {
        let ticker = app.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(Duration::from_millis(tick_ms));
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                interval.tick().await;
                ticker.tick(tick_ms as f64);
            }
        });
    }
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
