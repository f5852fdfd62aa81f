mod common;

use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use logiviz::service::{router, AppState, ServiceConfig};
use serde_json::Value;
use tower::ServiceExt;

use common::COUNTER;

fn app_with(config: ServiceConfig) -> Router {
    router(AppState::new(config))
}

fn app() -> Router {
    app_with(ServiceConfig::default())
}

async fn send(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn click(key: &str, time: i64) -> String {
    format!(r#"[{{"time":{time},"elements":[{{"key":"{key}","type":"click"}}]}}]"#)
}

fn label(spec: &Value) -> String {
    let els = spec["animation"][0]["elements"].as_array().unwrap();
    let e = els.iter().find(|e| e["key"] == "label").unwrap();
    e["text_label"].as_str().unwrap().to_string()
}

async fn create(app: &Router) -> String {
    let (status, body) = send(app, "POST", "/sessions", COUNTER).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    json(&body)["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_returns_initial_frame() {
    let (status, body) = send(&app(), "POST", "/sessions", COUNTER).await;
    assert_eq!(status, StatusCode::CREATED);
    let v = json(&body);
    let els = v["spec"]["animation"][0]["elements"].as_array().unwrap();
    assert_eq!(els.len(), 2);
    assert!(els.iter().all(|e| e["type"] == "text"));
    assert_eq!(label(&v["spec"]), "0");
}

#[tokio::test]
async fn empty_program_names_the_missing_theory() {
    let (status, body) = send(&app(), "POST", "/sessions", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(
        json(&body)["message"].as_str().unwrap().contains("no theory named T"),
        "{body}"
    );
}

#[tokio::test]
async fn parse_errors_carry_positions() {
    let (status, body) = send(&app(), "POST", "/sessions", "vocabulary V {\n  p(Q)\n}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v = json(&body);
    assert_eq!(v["line"], 2);
    assert!(v["column"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn unsatisfiable_initial_state_is_unprocessable() {
    let src = COUNTER.replace("theory T : V {", "theory T : V {\n 1 > 2.");
    let (status, body) = send(&app(), "POST", "/sessions", &src).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json(&body)["error"], "NoInitialState");
}

#[tokio::test]
async fn clicks_drive_the_counter() {
    let app = app();
    let id = create(&app).await;
    let uri = format!("/sessions/{id}/events");
    let (status, body) = send(&app, "POST", &uri, &click("button", 1)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(label(&json(&body)), "1");
    // No input rule for this key: the frame rule keeps the count.
    let (_, body) = send(&app, "POST", &uri, &click("nothing", 1)).await;
    assert_eq!(label(&json(&body)), "1");
    let (_, body) = send(&app, "POST", &uri, &click("label", 1)).await;
    assert_eq!(label(&json(&body)), "0");
    let (status, body) = send(&app, "GET", &format!("/sessions/{id}/frame"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(label(&json(&body)), "0");
}

#[tokio::test]
async fn stale_clicks_conflict() {
    let app = app();
    let id = create(&app).await;
    let (status, body) = send(&app, "POST", &format!("/sessions/{id}/events"), &click("button", 2)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(json(&body)["error"], "StaleClick");
}

#[tokio::test]
async fn malformed_clicks_are_bad_requests() {
    let app = app();
    let id = create(&app).await;
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/events"), "{").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = app();
    for uri in [
        "/sessions/nope/history",
        "/sessions/4a9e1c1e-0000-4000-8000-000000000000/frame",
    ] {
        assert_eq!(send(&app, "GET", uri, "").await.0, StatusCode::NOT_FOUND);
    }
    assert_eq!(
        send(&app, "POST", "/sessions/nope/events", "[]").await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn history_grows_by_one_frame_per_step() {
    let app = app();
    let id = create(&app).await;
    let uri = format!("/sessions/{id}/history");
    let (_, body) = send(&app, "GET", &uri, "").await;
    assert_eq!(json(&body).as_array().unwrap().len(), 1);
    for _ in 0..2 {
        send(&app, "POST", &format!("/sessions/{id}/events"), &click("button", 1)).await;
    }
    let (_, body) = send(&app, "GET", &uri, "").await;
    let h = json(&body);
    let labels: Vec<String> = h.as_array().unwrap().iter().map(label).collect();
    assert_eq!(labels, ["0", "1", "2"]);
}

#[tokio::test]
async fn replayed_sessions_have_identical_histories() {
    let app = app();
    let mut histories = Vec::new();
    for _ in 0..2 {
        let id = create(&app).await;
        for key in ["button", "button", "label"] {
            send(&app, "POST", &format!("/sessions/{id}/events"), &click(key, 1)).await;
        }
        histories.push(send(&app, "GET", &format!("/sessions/{id}/history"), "").await.1);
    }
    assert_eq!(histories[0], histories[1]);
}

#[tokio::test]
async fn finished_sessions_are_gone() {
    let app = app();
    let src = COUNTER.replace("Count = {0..100}", "Count = {0..1}");
    let (_, body) = send(&app, "POST", "/sessions", &src).await;
    let id = json(&body)["id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/events");
    assert_eq!(
        label(&json(&send(&app, "POST", &uri, &click("button", 1)).await.1)),
        "1"
    );
    let (status, body) = send(&app, "POST", &uri, &click("button", 1)).await;
    assert_eq!((status, body.as_str()), (StatusCode::OK, r#"{"status":"finished"}"#));
    let (status, _) = send(&app, "POST", &uri, &click("button", 1)).await;
    assert_eq!(status, StatusCode::GONE);
    let (_, body) = send(&app, "GET", &format!("/sessions/{id}/history"), "").await;
    assert_eq!(json(&body).as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let app = app_with(ServiceConfig {
        ttl: Duration::from_millis(50),
        ..Default::default()
    });
    let id = create(&app).await;
    assert_eq!(
        send(&app, "GET", &format!("/sessions/{id}/frame"), "").await.0,
        StatusCode::OK
    );
    tokio::time::sleep(Duration::from_millis(120)).await;
    assert_eq!(
        send(&app, "GET", &format!("/sessions/{id}/frame"), "").await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_events_are_serialised() {
    let app = app();
    let id = create(&app).await;
    let other = create(&app).await;
    let mut tasks = Vec::new();
    for _ in 0..6 {
        let (app, uri) = (app.clone(), format!("/sessions/{id}/events"));
        tasks.push(tokio::spawn(async move {
            send(&app, "POST", &uri, &click("button", 1)).await
        }));
    }
    let mut seen = Vec::new();
    for t in tasks {
        let (status, body) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        seen.push(label(&json(&body)).parse::<i64>().unwrap());
    }
    seen.sort();
    assert_eq!(seen, [1, 2, 3, 4, 5, 6]);
    let (_, body) = send(&app, "GET", &format!("/sessions/{id}/history"), "").await;
    let labels: Vec<String> = json(&body).as_array().unwrap().iter().map(label).collect();
    assert_eq!(labels, ["0", "1", "2", "3", "4", "5", "6"]);
    let (_, body) = send(&app, "GET", &format!("/sessions/{other}/frame"), "").await;
    assert_eq!(label(&json(&body)), "0");
}

#[tokio::test]
async fn serves_static_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>ui</p>").unwrap();
    let app = app_with(ServiceConfig {
        static_dir: Some(dir.path().to_owned()),
        ..Default::default()
    });
    let (status, body) = send(&app, "GET", "/index.html", "").await;
    assert_eq!((status, body.as_str()), (StatusCode::OK, "<p>ui</p>"));
}
