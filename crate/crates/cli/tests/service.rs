use std::path::PathBuf;

use animflow_cli::service::{router, AppState, ServiceConfig};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn slider_spec() -> Json {
    serde_json::from_str(&std::fs::read_to_string(corpus().join("gapminder_slider/spec.json")).unwrap()).unwrap()
}

fn app() -> AppState {
    AppState::new(ServiceConfig {
        base_dir: corpus().join("gapminder_slider"),
        default_spec: None,
        tick_ms: 0,
    })
}

async fn call(app: &AppState, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Json) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = router(app.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = if bytes.is_empty() {
        Json::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, json)
}

async fn post(app: &AppState, uri: &str, body: Json) -> (StatusCode, Json) {
    call(app, Method::POST, uri, Some(body.to_string())).await
}

fn anim_value(frame: &Json) -> &Json {
    &frame["frame"]["anim_values"]["current_frame"]
}

#[tokio::test]
async fn session_lifecycle() {
    let app = app();
    let (status, created) = post(&app, "/sessions", json!({"spec": slider_spec()})).await;
    assert_eq!(status, StatusCode::OK, "{created}");
    assert_eq!(created["session_id"], 1);
    assert_eq!(created["cycle_ms"], 5500.0);
    let kinds: Vec<&str> = created["widgets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["kind"].as_str().unwrap())
        .collect();
    assert!(
        kinds.contains(&"range-slider") && kinds.contains(&"checkbox"),
        "{kinds:?}"
    );

    let (status, frame) = post(&app, "/sessions/1/advance", json!({"dt_ms": 500})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(anim_value(&frame), 1960.0);

    let event = json!({"event": {"type": "widget_set", "widget": "current_frame", "value": 1995}, "seq": 7});
    let (status, frame) = post(&app, "/sessions/1/events", event).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(frame["seq"], 7);
    assert_eq!(anim_value(&frame), 1995.0);
    let playing = frame["frame"]["widgets"]
        .as_array()
        .unwrap()
        .iter()
        .find(|w| w["kind"] == "checkbox")
        .unwrap();
    assert_eq!(playing["value"], false);

    // Paused by the scrub: ticking no longer moves the clock.
    app.tick(1000.0);
    let (status, frame) = call(&app, Method::GET, "/sessions/1/frame", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(anim_value(&frame), 1995.0);

    let resume = json!({"event": {"type": "widget_set", "widget": "is_playing", "value": true}});
    assert_eq!(post(&app, "/sessions/1/events", resume).await.0, StatusCode::OK);
    app.tick(500.0);
    let (_, frame) = call(&app, Method::GET, "/sessions/1/frame", None).await;
    assert_eq!(anim_value(&frame), 2000.0);

    let (status, _) = call(&app, Method::DELETE, "/sessions/1", None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    assert_eq!(app.session_count(), 0);
    let (status, body) = call(&app, Method::GET, "/sessions/1/frame", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn session_ids_are_sequential_and_independent() {
    let app = app();
    for want in 1..=2 {
        let (_, created) = post(&app, "/sessions", json!({"spec": slider_spec().to_string()})).await;
        assert_eq!(created["session_id"], want);
    }
    post(&app, "/sessions/2/advance", json!({"dt_ms": 1000})).await;
    let (_, one) = call(&app, Method::GET, "/sessions/1/frame", None).await;
    let (_, two) = call(&app, Method::GET, "/sessions/2/frame", None).await;
    assert_eq!(anim_value(&one), 1955.0);
    assert_eq!(anim_value(&two), 1965.0);
}

#[tokio::test]
async fn inline_rows_replace_url_data() {
    let app = app();
    let mut spec = slider_spec();
    spec["data"] = json!({"url": "missing.csv"});
    let rows = json!([
        {"country": "A", "cluster": "x", "year": 2000, "fertility": 2, "life_expect": 70, "pop": 1},
        {"country": "A", "cluster": "x", "year": 2001, "fertility": 3, "life_expect": 71, "pop": 2}
    ]);
    let (status, created) = post(&app, "/sessions", json!({"spec": spec, "data": rows})).await;
    assert_eq!(status, StatusCode::OK, "{created}");
    assert_eq!(created["cycle_ms"], 1000.0);
}

#[tokio::test]
async fn malformed_requests_are_rejected() {
    let app = app();
    let (status, body) = call(&app, Method::POST, "/sessions", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());
    assert!(body["diagnostics"].is_array());

    let (status, body) = post(&app, "/sessions", json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");

    let (status, body) = post(&app, "/sessions", json!({"spec": {"mark": "blob"}})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(!body["diagnostics"].as_array().unwrap().is_empty(), "{body}");

    post(&app, "/sessions", json!({"spec": slider_spec()})).await;
    let (status, _) = post(&app, "/sessions/1/advance", json!({"dt_ms": -5})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post(&app, "/sessions/1/events", json!({"event": {"type": "teleport"}})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let bad_widget = json!({"event": {"type": "widget_set", "widget": "nope", "value": 1}});
    assert_eq!(
        post(&app, "/sessions/1/events", bad_widget).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        post(&app, "/sessions/9/advance", json!({"dt_ms": 5})).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&app, Method::DELETE, "/sessions/9", None).await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn default_spec_is_used_when_none_is_sent() {
    let app = AppState::new(ServiceConfig {
        base_dir: corpus().join("gapminder_slider"),
        default_spec: Some(slider_spec().to_string()),
        tick_ms: 0,
    });
    let (status, created) = post(&app, "/sessions", json!({})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(created["session_id"], 1);
}
