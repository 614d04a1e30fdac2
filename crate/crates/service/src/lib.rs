//! HTTP and WebSocket service for playing games against the engine's AI
//! and running self-play analyses.
//!
//! Commands go over HTTP; moves, AI replies and analysis progress are also
//! pushed on `/sessions/{id}/events`. All game logic lives in `ludeme`.

mod analysis;
mod session;
pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

pub use analysis::JobStatus;
pub use session::{CreateSession, SessionSummary};
use session::{load_model, Session, SessionHandle};
use wire::{ApiError, MessageType, MoveRequest, MoveView, StateView};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Ply cap for the AI's rollouts.
    pub move_cap: u32,
    /// Sessions untouched for this long are dropped.
    pub idle_ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            move_cap: 500,
            idle_ttl: Duration::from_secs(2 * 60 * 60),
        }
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    jobs: RwLock<HashMap<String, Arc<analysis::Job>>>,
}

fn new_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            inner: Arc::new(Inner {
                config,
                ..Inner::default()
            }),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        let s = self.inner.sessions.read().unwrap().get(id).cloned();
        let s = s.ok_or_else(|| ApiError::not_found("session", id))?;
        s.touch();
        Ok(s)
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.read().unwrap().len()
    }

    /// Drops sessions idle for longer than `ttl`; returns how many.
    pub fn evict_idle(&self, ttl: Duration) -> usize {
        let mut sessions = self.inner.sessions.write().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| s.idle_for() <= ttl);
        before - sessions.len()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", get(legal_moves).post(submit_move))
        .route("/sessions/{id}/events", get(events))
        .route("/analysis", post(start_analysis))
        .route("/analysis/{id}", get(poll_analysis))
        .with_state(state)
}

/// Serves until the process is stopped, evicting idle sessions once a minute.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = sweeper.evict_idle(sweeper.inner.config.idle_ttl);
            if n > 0 {
                log::info!("evicted {n} idle session(s)");
            }
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = serde_json::from_slice(&body).map_err(ApiError::bad_json)?;
    let model = load_model(&req.lud_text)?;
    let id = {
        let sessions = app.inner.sessions.read().unwrap();
        let mut id = new_id();
        while sessions.contains_key(&id) {
            id = new_id();
        }
        id
    };
    let handle = Arc::new(SessionHandle::new(Session::new(id.clone(), &req, model)?));
    let summary = {
        let mut s = handle.session.lock().await;
        // The AI opens when the human plays second.
        s.ai_replies(app.inner.config.move_cap, &handle.events).await?;
        s.summary(&handle.events)
    };
    app.inner.sessions.write().unwrap().insert(id, handle);
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionSummary>, ApiError> {
    let h = app.session(&id)?;
    let s = h.session.lock().await;
    Ok(Json(s.summary(&h.events)))
}

async fn legal_moves(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let h = app.session(&id)?;
    let s = h.session.lock().await;
    let moves: Vec<MoveView> = s.state.legal_moves().iter().enumerate().map(|(i, m)| MoveView::new(i, m)).collect();
    let msg = h.events.snapshot(
        MessageType::LegalMoves,
        serde_json::json!({ "mover": s.state.mover, "dice": s.state.pending_dice, "moves": moves }),
    );
    Ok(Json(msg).into_response())
}

async fn submit_move(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let h = app.session(&id)?;
    let req: MoveRequest = serde_json::from_slice(&body).map_err(ApiError::bad_json)?;
    let mut s = h.session.lock().await;
    let messages = s.submit(&req, app.inner.config.move_cap, &h.events).await?;
    h.touch();
    Ok(Json(serde_json::json!({ "messages": messages })).into_response())
}

async fn events(State(app): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Result<Response, ApiError> {
    let h = app.session(&id)?;
    Ok(ws.on_upgrade(move |socket| push_events(socket, h)))
}

async fn push_events(mut socket: WebSocket, h: Arc<SessionHandle>) {
    // Holding the session lock keeps moves from landing between the
    // snapshot and the subscription.
    let (snapshot, mut rx) = {
        let s = h.session.lock().await;
        let (seq, rx) = h.events.subscribe();
        let mut snap = h.events.snapshot(MessageType::State, StateView::new(&s.state));
        snap.seq = seq;
        (snap, rx)
    };
    let send = |m: &wire::WireMessage| Message::Text(serde_json::to_string(m).unwrap_or_default().into());
    if socket.send(send(&snapshot)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(m) => {
                    if socket.send(send(&m)).await.is_err() {
                        break;
                    }
                }
                Err(tokio::sync::broadcast::error::RecvError::Lagged(n)) => {
                    let err = h.events.snapshot(
                        MessageType::Error,
                        serde_json::json!({ "code": "lagged", "message": format!("{n} events dropped; reconnect") }),
                    );
                    let _ = socket.send(send(&err)).await;
                    break;
                }
                Err(_) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AnalysisQuery {
    session_id: Option<String>,
}

async fn start_analysis(
    State(app): State<AppState>,
    Query(q): Query<AnalysisQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let job = analysis::check_job(&body)?;
    let session = q.session_id.as_deref().map(|id| app.session(id)).transpose()?;
    let id = new_id();
    let handle = analysis::start(id.clone(), job, session);
    let status = handle.status();
    app.inner.jobs.write().unwrap().insert(id, handle);
    Ok((StatusCode::ACCEPTED, Json(status)).into_response())
}

async fn poll_analysis(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<JobStatus>, ApiError> {
    let job = app.inner.jobs.read().unwrap().get(&id).cloned();
    let job = job.ok_or_else(|| ApiError::not_found("analysis job", &id))?;
    Ok(Json(job.status()))
}
