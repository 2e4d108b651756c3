use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fieldlabel_core::session::{CommandEffect, Outcome, Session, SessionError, SessionStats};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::{watch, Notify};
use tokio::task::JoinHandle;

use crate::messages::{ClientMessage, ErrorCode, ServerMessage};
use crate::GatewayError;

/// Body of `GET /status`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatusSnapshot {
    pub running: bool,
    pub finished: bool,
    pub pending_frame: Option<u64>,
    pub session_dir: PathBuf,
    pub stats: SessionStats,
}

/// Body of `POST /stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopResponse {
    pub report: PathBuf,
    pub already_stopped: bool,
}

pub struct GatewayState {
    session: Mutex<Session>,
    snapshot: Mutex<StatusSnapshot>,
    finished: AtomicBool,
    operator: AtomicBool,
    stop_tx: watch::Sender<bool>,
}

impl GatewayState {
    pub fn new(session: Session) -> Arc<Self> {
        let state = Arc::new(Self {
            session: Mutex::new(session),
            snapshot: Mutex::new(StatusSnapshot::default()),
            finished: AtomicBool::new(false),
            operator: AtomicBool::new(false),
            stop_tx: watch::channel(false).0,
        });
        let session = state.session.lock().expect("session lock poisoned");
        state.refresh(&session);
        drop(session);
        state
    }

    fn refresh(&self, s: &Session) {
        *self.snapshot.lock().expect("snapshot lock poisoned") = StatusSnapshot {
            running: s.is_running(),
            finished: self.finished.load(Ordering::SeqCst),
            pending_frame: s.pending().map(|p| p.frame_id),
            session_dir: s.dir().to_path_buf(),
            stats: s.stats(),
        };
    }

    pub fn status(&self) -> StatusSnapshot {
        self.snapshot.lock().expect("snapshot lock poisoned").clone()
    }

    fn stats_message(&self) -> ServerMessage {
        let snap = self.status();
        ServerMessage::Stats { running: snap.running, finished: snap.finished, stats: snap.stats }
    }

    /// Runs `f` on a blocking thread with the session locked, then refreshes
    /// the status snapshot before releasing the lock.
    async fn with_session<T, F>(self: &Arc<Self>, f: F) -> T
    where
        T: Send + 'static,
        F: FnOnce(&mut Session, &GatewayState) -> T + Send + 'static,
    {
        let state = self.clone();
        tokio::task::spawn_blocking(move || {
            let mut session = state.session.lock().expect("session lock poisoned");
            let out = f(&mut session, &state);
            state.refresh(&session);
            out
        })
        .await
        .expect("session task panicked")
    }

    /// Stops the session; safe to call any number of times.
    pub async fn stop(self: &Arc<Self>) -> Result<StopResponse, SessionError> {
        let response = self
            .with_session(|s, _| {
                let already_stopped = !s.is_running();
                s.stop().map(|report| StopResponse { report, already_stopped })
            })
            .await;
        self.stop_tx.send_replace(true);
        response
    }
}

pub fn router(state: Arc<GatewayState>) -> Router {
    Router::new()
        .route("/stream", get(stream))
        .route("/status", get(status))
        .route("/stop", post(stop))
        .with_state(state)
}

async fn status(State(state): State<Arc<GatewayState>>) -> Json<StatusSnapshot> {
    Json(state.status())
}

async fn stop(State(state): State<Arc<GatewayState>>) -> Response {
    match state.stop().await {
        Ok(r) => Json(r).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn stream(ws: WebSocketUpgrade, State(state): State<Arc<GatewayState>>) -> Response {
    ws.on_upgrade(move |socket| operator_connection(socket, state))
}

struct OperatorSlot(Arc<GatewayState>);

impl Drop for OperatorSlot {
    fn drop(&mut self) {
        self.0.operator.store(false, Ordering::SeqCst);
    }
}

/// What one advance of the session produced.
enum Step {
    /// A frame now waits for the operator.
    Pending(ServerMessage),
    /// A frame was handled without the operator (error or auto-save).
    Passed(ServerMessage),
    Finished,
    Stopped,
    Failed(ServerMessage),
}

fn advance(s: &mut Session, state: &GatewayState) -> Step {
    let frame = |s: &Session| {
        let p = s.pending().expect("caller checked");
        let rec = s.record(p.frame_id).expect("pending frame has a record");
        ServerMessage::frame(p, rec.inference_latency_ms, rec.outcome)
    };
    if s.pending().is_some() {
        return frame(s).map_or_else(|e| Step::Failed(ServerMessage::from_session_error(None, &e)), Step::Pending);
    }
    if !s.is_running() {
        return Step::Stopped;
    }
    match s.process_next() {
        Ok(None) => {
            state.finished.store(true, Ordering::SeqCst);
            Step::Finished
        }
        Ok(Some(rec)) if rec.outcome == Outcome::Error => Step::Passed(ServerMessage::error(
            Some(rec.frame_id),
            ErrorCode::Inference,
            rec.error.unwrap_or_default(),
        )),
        Ok(Some(_)) if s.pending().is_some() => {
            frame(s).map_or_else(|e| Step::Failed(ServerMessage::from_session_error(None, &e)), Step::Pending)
        }
        Ok(Some(rec)) => {
            // Saved by auto-save: report what was detected without pixels.
            Step::Passed(ServerMessage::Frame {
                frame_id: rec.frame_id,
                image_b64: String::new(),
                detections: rec.detections.iter().map(Into::into).collect(),
                latency_ms: rec.inference_latency_ms,
                outcome: rec.outcome,
            })
        }
        Err(e) => Step::Failed(ServerMessage::from_session_error(None, &e)),
    }
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    socket.send(Message::Text(msg.to_json().into())).await.is_ok()
}

enum Inbound {
    Continue { advance: bool },
    Close,
}

async fn handle_text(socket: &mut WebSocket, state: &Arc<GatewayState>, text: &str) -> Inbound {
    let (frame_id, command) = match serde_json::from_str::<ClientMessage>(text) {
        Ok(ClientMessage::Command { frame_id, command }) => (frame_id, command),
        Err(e) => {
            let ok = send(socket, &ServerMessage::error(None, ErrorCode::BadRequest, e.to_string())).await;
            return if ok { Inbound::Continue { advance: false } } else { Inbound::Close };
        }
    };
    let action = command.name().to_string();
    let result = state.with_session(move |s, _| s.apply_command(frame_id, command)).await;
    let effect = match result {
        Ok(effect) => effect,
        Err(e) => {
            let ok = send(socket, &ServerMessage::from_session_error(Some(frame_id), &e)).await;
            return if ok { Inbound::Continue { advance: false } } else { Inbound::Close };
        }
    };
    if !send(socket, &ServerMessage::Ack { frame_id, action }).await {
        return Inbound::Close;
    }
    match effect {
        CommandEffect::Saved { .. } | CommandEffect::Skipped => {
            let ok = send(socket, &state.stats_message()).await;
            if ok { Inbound::Continue { advance: true } } else { Inbound::Close }
        }
        CommandEffect::Stopped { .. } => {
            state.stop_tx.send_replace(true);
            Inbound::Continue { advance: false }
        }
        CommandEffect::ClassSet(_) | CommandEffect::BoxesEdited(_) => Inbound::Continue { advance: false },
    }
}

async fn operator_connection(mut socket: WebSocket, state: Arc<GatewayState>) {
    if state.operator.swap(true, Ordering::SeqCst) {
        let busy = ServerMessage::error(None, ErrorCode::Busy, "another operator is connected");
        let _ = send(&mut socket, &busy).await;
        let _ = socket.send(Message::Close(None)).await;
        return;
    }
    let _slot = OperatorSlot(state.clone());
    let mut stop_rx = state.stop_tx.subscribe();
    let mut need_advance = true;
    loop {
        if *stop_rx.borrow_and_update() {
            let _ = send(&mut socket, &state.stats_message()).await;
            let _ = socket.send(Message::Close(None)).await;
            return;
        }
        if need_advance {
            let step = state.with_session(advance).await;
            let delivered = match &step {
                Step::Pending(m) | Step::Passed(m) | Step::Failed(m) => send(&mut socket, m).await,
                Step::Finished | Step::Stopped => send(&mut socket, &state.stats_message()).await,
            };
            if !delivered {
                return;
            }
            need_advance = matches!(step, Step::Passed(_));
            // Take any command that arrived meanwhile before the next frame.
            let Ok(incoming) = tokio::time::timeout(Duration::ZERO, socket.recv()).await else {
                continue;
            };
            match incoming {
                Some(Ok(Message::Text(t))) => match handle_text(&mut socket, &state, t.as_str()).await {
                    Inbound::Continue { advance } => need_advance |= advance,
                    Inbound::Close => return,
                },
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                Some(Ok(_)) => {}
            }
            continue;
        }
        tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(t))) => match handle_text(&mut socket, &state, t.as_str()).await {
                    Inbound::Continue { advance } => need_advance = advance,
                    Inbound::Close => return,
                },
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                Some(Ok(_)) => {}
            },
            _ = stop_rx.changed() => {}
        }
    }
}

/// A running gateway bound to a local address.
pub struct Gateway {
    addr: SocketAddr,
    state: Arc<GatewayState>,
    shutdown: Arc<Notify>,
    server: JoinHandle<std::io::Result<()>>,
}

impl Gateway {
    /// Binds `addr` and serves `/stream`, `/status` and `/stop`.
    pub async fn serve(session: Session, addr: SocketAddr) -> Result<Self, GatewayError> {
        let listener = TcpListener::bind(addr).await.map_err(|e| GatewayError::Bind(addr, e))?;
        let addr = listener.local_addr()?;
        let state = GatewayState::new(session);
        let shutdown = Arc::new(Notify::new());
        let signal = shutdown.clone();
        let app = router(state.clone());
        let server = tokio::spawn(async move {
            axum::serve(listener, app).with_graceful_shutdown(async move { signal.notified().await }).await
        });
        log::info!("gateway listening on {addr}");
        Ok(Self { addr, state, shutdown, server })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn state(&self) -> &Arc<GatewayState> {
        &self.state
    }

    /// Resolves once the session has been stopped by `/stop` or a quit
    /// command.
    pub async fn stopped(&self) {
        let mut rx = self.state.stop_tx.subscribe();
        let _ = rx.wait_for(|stopped| *stopped).await;
    }

    /// Stops the session if needed, closes the stream and shuts the server
    /// down. Returns the latency report path.
    pub async fn shutdown(self) -> Result<PathBuf, GatewayError> {
        let report = self.state.stop().await?.report;
        self.shutdown.notify_one();
        self.server.await.map_err(|e| GatewayError::Server(e.to_string()))??;
        Ok(report)
    }
}
