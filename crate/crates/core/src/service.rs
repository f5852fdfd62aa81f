//! HTTP front end for the simulation loop.
//!
//! | method | path                      | body               | reply                  |
//! |--------|---------------------------|--------------------|------------------------|
//! | POST   | `/sessions`               | program text       | 201 `{"id", "spec"}`   |
//! | POST   | `/sessions/{id}/events`   | click wire JSON    | 200 spec or finished   |
//! | GET    | `/sessions/{id}/history`  |                    | 200 array of specs     |
//! | GET    | `/sessions/{id}/frame`    |                    | 200 current spec       |
//!
//! Errors are `{"error": kind, "message": text}`, with `line` and `column`
//! for program errors.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use log::info;
use serde_json::json;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::apps::{self, AppError, SimConfig, SimState, SimStatus};
use crate::inputdecode::{self, ClickEvent};
use crate::lang::parse_program;
use crate::ltc::LtcError;
use crate::solver::{SolveError, SolveOptions};
use crate::vizencode::{self, DrawingSpec};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Idle sessions older than this are dropped.
    pub ttl: Duration,
    pub node_budget: u64,
    /// Caps the candidate states enumerated per inference.
    pub nbmodels_cap: Option<usize>,
    /// Directory served at `/` for the browser client.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ttl: Duration::from_secs(30 * 60),
            node_budget: SolveOptions::default().node_budget,
            nbmodels_cap: None,
            static_dir: None,
        }
    }
}

struct Session {
    config: SimConfig,
    state: SimState,
    history: Vec<(Vec<ClickEvent>, DrawingSpec)>,
}

/// A stored session. The idle clock sits outside the session lock; the
/// session lock queues waiters first come, first served.
struct Entry {
    last_used: Mutex<Instant>,
    session: Arc<tokio::sync::Mutex<Session>>,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<Uuid, Arc<Entry>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    /// Finds a live session and marks it used.
    fn lookup(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<Session>>> {
        let id = Uuid::parse_str(id).ok()?;
        let mut all = self.sessions.lock().unwrap();
        let entry = all.get(&id)?.clone();
        let mut last = entry.last_used.lock().unwrap();
        if last.elapsed() > self.config.ttl {
            drop(last);
            all.remove(&id);
            info!("session {id} expired");
            return None;
        }
        *last = Instant::now();
        Some(entry.session.clone())
    }

    fn evict(&self) {
        let ttl = self.config.ttl;
        self.sessions
            .lock()
            .unwrap()
            .retain(|_, e| e.last_used.lock().unwrap().elapsed() <= ttl);
    }
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let app = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/frame", get(frame))
        .with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config))).await
}

fn json_body(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, kind: &str, message: String) -> Response {
    json_body(status, json!({"error": kind, "message": message}).to_string())
}

fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "UnknownSession", "no such session".into())
}

fn app_error(e: AppError) -> Response {
    let msg = e.to_string();
    match e {
        AppError::Lang(l) => {
            let p = l.pos();
            let body = json!({"error": l.kind(), "message": msg, "line": p.line, "column": p.col});
            json_body(StatusCode::BAD_REQUEST, body.to_string())
        }
        AppError::MissingObject { .. } => error(StatusCode::BAD_REQUEST, "MissingObject", msg),
        AppError::Decode(_) => error(StatusCode::BAD_REQUEST, "MalformedInput", msg),
        AppError::NoInitialState => error(StatusCode::UNPROCESSABLE_ENTITY, "NoInitialState", msg),
        AppError::StaleClick { .. } => error(StatusCode::CONFLICT, "StaleClick", msg),
        AppError::Finished => error(StatusCode::GONE, "Finished", msg),
        AppError::AmbiguousAction { .. } => error(StatusCode::UNPROCESSABLE_ENTITY, "AmbiguousAction", msg),
        AppError::Solve(SolveError::Timeout { .. }) | AppError::Ltc(LtcError::Solve(SolveError::Timeout { .. })) => {
            error(StatusCode::SERVICE_UNAVAILABLE, "Timeout", msg)
        }
        _ => error(StatusCode::UNPROCESSABLE_ENTITY, "InferenceError", msg),
    }
}

fn finished_body() -> String {
    json!({"status": "finished"}).to_string()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, Response> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))
}

async fn create_session(State(app): State<AppState>, body: String) -> Response {
    app.evict();
    let opts = SolveOptions {
        nbmodels: Some(1),
        node_budget: app.config.node_budget,
    };
    let cap = app.config.nbmodels_cap;
    let result = blocking(move || -> Result<(SimConfig, SimState), AppError> {
        let program = parse_program(&body)?;
        let mut config = SimConfig::from_program(&program, opts)?;
        config.max_candidates = cap;
        let state = apps::sim_init(&config)?;
        Ok((config, state))
    })
    .await;
    let (config, state) = match result {
        Ok(Ok(x)) => x,
        Ok(Err(e)) => return app_error(e),
        Err(r) => return r,
    };
    let id = Uuid::new_v4();
    let spec = vizencode::serialize(&state.last_spec);
    let session = Session {
        config,
        history: vec![(Vec::new(), state.last_spec.clone())],
        state,
    };
    let entry = Entry {
        last_used: Mutex::new(Instant::now()),
        session: Arc::new(tokio::sync::Mutex::new(session)),
    };
    app.sessions.lock().unwrap().insert(id, Arc::new(entry));
    info!("session {id} created");
    json_body(StatusCode::CREATED, format!(r#"{{"id":"{id}","spec":{spec}}}"#))
}

async fn post_event(State(app): State<AppState>, Path(id): Path<String>, body: String) -> Response {
    let Some(session) = app.lookup(&id) else {
        return not_found();
    };
    let clicks = match inputdecode::parse_clicks(&body) {
        Ok(c) => c,
        Err(e) => return app_error(e.into()),
    };
    let mut s = session.lock_owned().await;
    let result = blocking(move || -> Result<Option<String>, AppError> {
        let next = apps::sim_step(&s.config, &s.state, &clicks)?;
        s.state = next;
        if s.state.status == SimStatus::Finished {
            return Ok(None);
        }
        let spec = s.state.last_spec.clone();
        s.history.push((clicks, spec.clone()));
        Ok(Some(vizencode::serialize(&spec)))
    })
    .await;
    match result {
        Ok(Ok(Some(spec))) => json_body(StatusCode::OK, spec),
        Ok(Ok(None)) => json_body(StatusCode::OK, finished_body()),
        Ok(Err(e)) => app_error(e),
        Err(r) => r,
    }
}

async fn history(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(session) = app.lookup(&id) else {
        return not_found();
    };
    let s = session.lock().await;
    let specs: Vec<String> = s.history.iter().map(|(_, d)| vizencode::serialize(d)).collect();
    json_body(StatusCode::OK, format!("[{}]", specs.join(",")))
}

async fn frame(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(session) = app.lookup(&id) else {
        return not_found();
    };
    let s = session.lock().await;
    if s.state.status == SimStatus::Finished {
        return json_body(StatusCode::OK, finished_body());
    }
    json_body(StatusCode::OK, vizencode::serialize(&s.state.last_spec))
}
