//! Network face of the engine.
//!
//! | route | |
//! |---|---|
//! | `GET /scenarios` | catalog of `.itx` files in the scenario directory |
//! | `POST /sessions` | `{"scenario_id":…,"difficulty":…}` → `{"id":…}` |
//! | `GET /sessions/{id}/state` | [`wire::SessionState`] |
//! | `GET /sessions/{id}/replay` | replay log as JSON Lines |
//! | `GET /sessions/{id}/stream` | WebSocket of [`wire::ServerMessage`] / [`wire::ClientCommand`] |
//!
//! Every session runs its own engine task at `dt` wall-clock pace and
//! pushes a [`wire::WireFrame`] every `stream_divisor` ticks. Commands are
//! queued on arrival and applied by the next engine tick.

pub mod catalog;
pub mod client;
mod live;
pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use interact_core::physics::WorldConfig;
use interact_core::session::SessionError;
use tokio::sync::broadcast::error::RecvError;

pub use live::{Event, Live};

use catalog::LoadError;
use wire::{ClientCommand, Created, CreateSession, ErrorBody, ServerMessage};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_STREAM_DIVISOR: u64 = 6;

#[derive(Clone, Debug)]
pub struct Config {
    pub port: u16,
    pub scenario_dir: PathBuf,
    pub stream_divisor: u64,
    /// Engine ticks per `dt` of wall time. 1 is real time.
    pub time_scale: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            port: DEFAULT_PORT,
            scenario_dir: PathBuf::from("scenarios"),
            stream_divisor: DEFAULT_STREAM_DIVISOR,
            time_scale: 1.0,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<Config>,
    sessions: Arc<RwLock<HashMap<String, Arc<Live>>>>,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    pub fn session(&self, id: &str) -> Option<Arc<Live>> {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).get(id).cloned()
    }

    fn tick_period(&self) -> Duration {
        Duration::from_secs_f64(WorldConfig::default().dt / self.config.time_scale)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/replay", get(session_replay))
        .route("/sessions/{id}/stream", get(session_stream))
        .with_state(state)
}

/// A server running in the background.
pub struct Server {
    pub addr: SocketAddr,
    pub state: AppState,
    pub handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

/// Binds `host:config.port` (port 0 picks a free one) and serves in a
/// background task.
pub async fn spawn(config: Config, host: &str) -> std::io::Result<Server> {
    let listener = tokio::net::TcpListener::bind((host, config.port)).await?;
    let addr = listener.local_addr()?;
    let state = AppState::new(config);
    let app = router(state.clone());
    let handle = tokio::spawn(async move { axum::serve(listener, app).await });
    Ok(Server { addr, state, handle })
}

/// Serves on all interfaces until the process is stopped.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let server = spawn(config, "0.0.0.0").await?;
    tracing::info!(addr = %server.addr, "gateway listening");
    server.handle.await.map_err(std::io::Error::other)?
}

fn error(status: StatusCode, error: impl Into<String>, available: Vec<String>) -> Response {
    (
        status,
        Json(ErrorBody {
            error: error.into(),
            available,
        }),
    )
        .into_response()
}

fn no_session(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("unknown session `{id}`"), Vec::new())
}

async fn list_scenarios(State(app): State<AppState>) -> Response {
    match catalog::list(&app.config.scenario_dir) {
        Ok(entries) => Json(entries).into_response(),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("cannot read {}: {e}", app.config.scenario_dir.display()),
            Vec::new(),
        ),
    }
}

async fn create_session(State(app): State<AppState>, Json(req): Json<CreateSession>) -> Response {
    let scenario = match catalog::load(&app.config.scenario_dir, &req.scenario_id) {
        Ok(s) => s,
        Err(e @ LoadError::NotFound(_)) => {
            let ids = catalog::list(&app.config.scenario_dir)
                .map(|c| c.into_iter().filter(|e| e.valid).map(|e| e.id).collect())
                .unwrap_or_default();
            return error(StatusCode::NOT_FOUND, e.to_string(), ids);
        }
        Err(e @ LoadError::Invalid { .. }) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), Vec::new()),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Vec::new()),
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let live = Live::spawn(
        id.clone(),
        req.scenario_id.clone(),
        scenario,
        &req.difficulty,
        app.config.stream_divisor,
        app.tick_period(),
    );
    match live {
        Ok(live) => {
            app.sessions.write().unwrap_or_else(|p| p.into_inner()).insert(id.clone(), live);
            tracing::info!(session = %id, scenario = %req.scenario_id, difficulty = %req.difficulty, "session created");
            (StatusCode::CREATED, Json(Created { id })).into_response()
        }
        Err(SessionError::UnknownDifficulty { requested, available }) => error(
            StatusCode::NOT_FOUND,
            format!("unknown difficulty `{requested}`; valid: {}", available.join(", ")),
            available,
        ),
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), Vec::new()),
    }
}

async fn session_state(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    match app.session(&id) {
        Some(live) => Json(live.state()).into_response(),
        None => no_session(&id),
    }
}

async fn session_replay(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(live) = app.session(&id) else {
        return no_session(&id);
    };
    match live.replay_log() {
        Ok(log) => ([(header::CONTENT_TYPE, "application/x-ndjson")], log.to_jsonl()).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Vec::new()),
    }
}

async fn session_stream(ws: WebSocketUpgrade, State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let live = app.session(&id);
    ws.on_upgrade(move |socket| async move {
        match live {
            Some(live) => run_stream(socket, live).await,
            None => close(socket, 4404, &format!("unknown session `{id}`")).await,
        }
    })
}

async fn close(mut socket: WebSocket, code: u16, reason: &str) {
    let frame = CloseFrame {
        code,
        reason: reason.into(),
    };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn send(socket: &mut WebSocket, m: &ServerMessage) -> bool {
    socket.send(Message::text(m.to_json())).await.is_ok()
}

async fn run_stream(mut socket: WebSocket, live: Arc<Live>) {
    let (mut rx, ended) = live.subscribe();
    if let Some(f) = ended {
        if !send(&mut socket, &ServerMessage::Final(f)).await {
            return;
        }
    }
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let reply = match incoming {
                    None | Some(Err(_)) | Some(Ok(Message::Close(_))) => return,
                    Some(Ok(Message::Text(t))) => ClientCommand::parse(t.as_str()).and_then(|c| live.command(c)).err(),
                    Some(Ok(Message::Binary(_))) => Some("binary messages are not accepted".to_string()),
                    Some(Ok(_)) => None,
                };
                if let Some(message) = reply {
                    if !send(&mut socket, &ServerMessage::error(message)).await {
                        return;
                    }
                }
            }
            event = rx.recv() => match event {
                Ok(Event::Text(t)) => {
                    if socket.send(Message::text(&*t)).await.is_err() {
                        return;
                    }
                }
                Ok(Event::Close(reason)) => return close(socket, 1011, &reason).await,
                Err(RecvError::Lagged(n)) => tracing::warn!(session = %live.id, skipped = n, "slow subscriber"),
                Err(RecvError::Closed) => return close(socket, 1001, "session gone").await,
            }
        }
    }
}
