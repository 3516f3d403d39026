//! WebSocket session server.
//!
//! `/ws` carries [`wire::WireMessage`] frames, `/healthz` reports the build
//! version and `/stats` the transcript-to-response latency.

pub mod session;
pub mod wire;

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::serve::ListenerExt;
use axum::{Json, Router};
use cogspeech_core::scoring::BiomarkerResources;
use cogspeech_core::{EventPayload, Speaker, UtteranceRecord};
use futures::{SinkExt, StreamExt};
use serde::Serialize;
use tokio::sync::{mpsc, oneshot};

use crate::config::EngineConfig;
use crate::resources::load_resources;
use crate::responder::EngineResponder;
use crate::session_log::{latest_scores, log_path, valid_session_id, SessionLog};
use session::{ConnId, DialogueJob, Session, SessionDeps};
use wire::{codes, control, decode_audio, parse_message, MessageType, Rejection, WireMessage};

const LATENCY_WINDOW: usize = 10_000;

/// Recent transcript-to-response latencies.
#[derive(Debug, Default)]
pub struct LatencyStats {
    samples: VecDeque<f64>,
    total: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LatencySummary {
    pub responses: u64,
    pub window: usize,
    pub p50_ms: Option<f64>,
    pub p99_ms: Option<f64>,
    pub max_ms: Option<f64>,
}

/// Nearest-rank percentile of sorted values.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q / 100.0 * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

impl LatencyStats {
    pub fn record(&mut self, d: Duration) {
        if self.samples.len() == LATENCY_WINDOW {
            self.samples.pop_front();
        }
        self.samples.push_back(d.as_secs_f64() * 1000.0);
        self.total += 1;
    }

    pub fn summary(&self) -> LatencySummary {
        let mut v: Vec<f64> = self.samples.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        LatencySummary {
            responses: self.total,
            window: v.len(),
            p50_ms: percentile(&v, 50.0),
            p99_ms: percentile(&v, 99.0),
            max_ms: v.last().copied(),
        }
    }
}

struct AppState {
    cfg: EngineConfig,
    deps: SessionDeps,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    next_conn: AtomicU64,
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// A running server.
pub struct Server {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<()>,
    state: Arc<AppState>,
}

impl Server {
    /// Loads resources from the config and binds `host:port`; port 0
    /// picks a free port.
    pub async fn bind(cfg: EngineConfig) -> Result<Server> {
        let res = load_resources(&cfg)?;
        Self::bind_with(cfg, res).await
    }

    pub async fn bind_with(cfg: EngineConfig, resources: BiomarkerResources) -> Result<Server> {
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.server.log_dir)
            .with_context(|| format!("creating {}", cfg.server.log_dir.display()))?;
        let deps = SessionDeps {
            resources: Arc::new(resources),
            scoring: cfg.live.clone(),
            responder: Arc::new(EngineResponder::from_config(&cfg.dialogue)?),
            system_prompt: cfg.dialogue.system_prompt.clone(),
            dialogue_turns: cfg.server.dialogue_turns,
            deadline: Duration::from_millis(cfg.dialogue.deadline_ms),
            stats: Arc::new(Mutex::new(LatencyStats::default())),
        };
        let listener = tokio::net::TcpListener::bind((cfg.server.host.as_str(), cfg.server.port))
            .await
            .with_context(|| format!("binding {}:{}", cfg.server.host, cfg.server.port))?;
        let addr = listener.local_addr()?;
        let state = Arc::new(AppState { cfg, deps, sessions: Mutex::new(HashMap::new()), next_conn: AtomicU64::new(1) });
        let app = Router::new()
            .route("/ws", get(ws_handler))
            .route("/healthz", get(healthz))
            .route("/stats", get(stats))
            .with_state(Arc::clone(&state));
        let (tx, rx) = oneshot::channel::<()>();
        let reaper = tokio::spawn(reap_idle(Arc::clone(&state)));
        let task = tokio::spawn(async move {
            let listener = listener.tap_io(|io| {
                if let Err(e) = io.set_nodelay(true) {
                    tracing::debug!(error = %e, "TCP_NODELAY not set");
                }
            });
            let serve = axum::serve(listener, app).with_graceful_shutdown(async {
                let _ = rx.await;
            });
            if let Err(e) = serve.await {
                tracing::error!(error = %e, "server stopped");
            }
            reaper.abort();
        });
        tracing::info!(%addr, "listening");
        Ok(Server { addr, shutdown: Some(tx), task, state })
    }

    pub fn latency(&self) -> LatencySummary {
        lock(&self.state.deps.stats).summary()
    }

    pub fn session_count(&self) -> usize {
        lock(&self.state.sessions).len()
    }

    pub async fn wait(mut self) {
        self.shutdown.take();
        let _ = (&mut self.task).await;
    }

    /// Stops accepting connections and ends every open session.
    pub async fn shutdown(mut self) {
        let sessions: Vec<Arc<Session>> = lock(&self.state.sessions).drain().map(|(_, s)| s).collect();
        for s in sessions {
            s.end().await;
        }
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = tokio::time::timeout(Duration::from_secs(5), &mut self.task).await;
    }
}

/// Serves until ctrl-c.
pub async fn run(cfg: EngineConfig) -> Result<()> {
    let server = Server::bind(cfg).await?;
    println!("listening on ws://{}/ws", server.addr);
    tokio::signal::ctrl_c().await.context("waiting for ctrl-c")?;
    server.shutdown().await;
    Ok(())
}

async fn healthz() -> impl IntoResponse {
    Json(serde_json::json!({ "status": "ok", "version": crate::VERSION }))
}

async fn stats(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    let latency = lock(&state.deps.stats).summary();
    let sessions = lock(&state.sessions).len();
    Json(serde_json::json!({ "sessions": sessions, "latency": latency }))
}

async fn ws_handler(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

async fn reap_idle(state: Arc<AppState>) {
    let limit = Duration::from_secs(state.cfg.server.idle_timeout_s);
    let mut every = tokio::time::interval(Duration::from_secs(1).min(limit.max(Duration::from_millis(100))));
    loop {
        every.tick().await;
        let idle: Vec<Arc<Session>> = {
            let mut map = lock(&state.sessions);
            let ids: Vec<String> = map
                .iter()
                .filter(|(_, s)| s.detached_for().is_some_and(|d| d >= limit))
                .map(|(id, _)| id.clone())
                .collect();
            ids.iter().filter_map(|id| map.remove(id)).collect()
        };
        for s in idle {
            tracing::info!(session = %s.id, "ending idle session");
            s.end().await;
        }
    }
}

/// Per-connection view of the sessions it drives.
struct Conn {
    id: ConnId,
    tx: mpsc::UnboundedSender<WireMessage>,
    /// Last inbound seq per attached session.
    sessions: HashMap<String, (Arc<Session>, Option<u64>)>,
}

async fn connection(socket: WebSocket, state: Arc<AppState>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<WireMessage>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(Message::Text(msg.to_json().into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    let mut conn = Conn { id: state.next_conn.fetch_add(1, Ordering::Relaxed), tx, sessions: HashMap::new() };

    while let Some(frame) = stream.next().await {
        let Ok(frame) = frame else { break };
        match frame {
            Message::Text(text) => {
                let received = Instant::now();
                match parse_message(text.as_str()) {
                    Ok(msg) => handle(&state, &mut conn, msg, received).await,
                    Err(r) => reject(&conn, r),
                }
            }
            Message::Binary(_) => reject(&conn, Rejection::new(codes::BAD_MESSAGE, "binary frames are not accepted", None)),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => {}
        }
    }
    for (s, _) in conn.sessions.values() {
        s.detach(conn.id);
    }
    drop(conn);
    let _ = writer.await;
}

/// Exactly one error frame per rejected message. Errors about an attached
/// session go through the session so they carry its seq.
fn reject(conn: &Conn, r: Rejection) {
    tracing::debug!(code = r.code, message = %r.message, "rejected frame");
    if let Some((s, _)) = r.session_id.as_ref().and_then(|id| conn.sessions.get(id)) {
        if s.is_attached_to(conn.id) {
            s.fail(r.code, r.message);
            return;
        }
    }
    let _ = conn.tx.send(WireMessage::error(r.session_id.as_deref(), r.code, r.message));
}

async fn handle(state: &Arc<AppState>, conn: &mut Conn, msg: WireMessage, received: Instant) {
    let sid = msg.session_id.clone();
    let r = match msg.kind {
        MessageType::SessionControl => control_message(state, conn, msg).await,
        MessageType::Transcript => session_message(conn, &msg).and_then(|s| transcript(&s, msg, received)),
        MessageType::AudioChunk => {
            session_message(conn, &msg).and_then(|s| audio(&s, &msg, state.cfg.server.max_chunk_ms))
        }
        MessageType::Response | MessageType::Biomarkers | MessageType::Error => Err(Rejection::new(
            codes::BAD_MESSAGE,
            format!("{:?} frames are sent by the server only", msg.kind),
            sid.as_deref(),
        )),
    };
    if let Err(r) = r {
        reject(conn, r);
    }
}

/// Resolves the attached session and enforces increasing inbound seq.
fn session_message(conn: &mut Conn, msg: &WireMessage) -> Result<Arc<Session>, Rejection> {
    let sid = msg.session_id.as_deref();
    let id = sid.ok_or_else(|| Rejection::new(codes::NO_SESSION, "missing session_id", None))?;
    let (session, last) = match conn.sessions.get_mut(id) {
        Some((s, last)) if s.is_attached_to(conn.id) && !s.is_ended() => (Arc::clone(s), last),
        _ => return Err(Rejection::new(codes::NO_SESSION, format!("session {id:?} is not open on this connection"), None)),
    };
    let seq = msg.seq.ok_or_else(|| Rejection::new(codes::BAD_SEQ, "missing seq", sid))?;
    if let Some(prev) = *last {
        if seq <= prev {
            return Err(Rejection::new(codes::BAD_SEQ, format!("seq {seq} does not follow {prev}"), sid));
        }
    }
    *last = Some(seq);
    Ok(session)
}

fn transcript(session: &Session, msg: WireMessage, received: Instant) -> Result<(), Rejection> {
    let sid = Some(session.id.as_str());
    let bad = |m: String| Rejection::new(codes::BAD_TRANSCRIPT, m, sid);
    let text = msg.text.unwrap_or_default();
    if text.trim().is_empty() {
        return Err(bad("empty transcript text".into()));
    }
    let speaker = msg.speaker.ok_or_else(|| bad("missing speaker".into()))?;
    let (Some(t0), Some(t1)) = (msg.t_start_ms, msg.t_end_ms) else {
        return Err(bad("missing t_start_ms or t_end_ms".into()));
    };
    let u = UtteranceRecord::new(&session.id, speaker, &text, t0, t1).map_err(|e| bad(e.to_string()))?;
    if msg.is_final.unwrap_or(true) && speaker == Speaker::Patient {
        session.request_response(DialogueJob { text: text.clone(), received });
    }
    session.log(EventPayload::Utterance(u.clone()));
    session.ingest_utterance(u);
    Ok(())
}

fn audio(session: &Session, msg: &WireMessage, max_chunk_ms: u64) -> Result<(), Rejection> {
    let buf = decode_audio(msg, max_chunk_ms)?;
    session.check_rate(buf.sample_rate_hz()).map_err(|first| {
        Rejection::new(
            codes::BAD_AUDIO,
            format!("session audio is {first} Hz, chunk is {} Hz", buf.sample_rate_hz()),
            Some(&session.id),
        )
    })?;
    session.ingest_audio(buf);
    Ok(())
}

async fn control_message(state: &Arc<AppState>, conn: &mut Conn, msg: WireMessage) -> Result<(), Rejection> {
    let sid = msg.session_id.as_deref();
    let id = sid.ok_or_else(|| Rejection::new(codes::BAD_SESSION_ID, "missing session_id", None))?;
    match msg.text.as_deref() {
        Some(control::START) => start_session(state, conn, id, msg.seq),
        Some(control::END) => {
            let session = session_message(conn, &msg)?;
            end_session(state, conn, &session).await;
            Ok(())
        }
        other => Err(Rejection::new(codes::BAD_CONTROL, format!("unknown control action {other:?}"), sid)),
    }
}

fn start_session(state: &Arc<AppState>, conn: &mut Conn, id: &str, seq: Option<u64>) -> Result<(), Rejection> {
    if !valid_session_id(id) {
        return Err(Rejection::new(codes::BAD_SESSION_ID, format!("invalid session id {id:?}"), None));
    }
    let existing = lock(&state.sessions).get(id).cloned();
    let (session, action, latest) = match existing {
        Some(s) => {
            let latest = s.latest_scores();
            (s, control::RESUMED, latest)
        }
        None => {
            let dir = &state.cfg.server.log_dir;
            let open_err = |e: String| Rejection::new(codes::BAD_SESSION_ID, e, None);
            let path = log_path(dir, id).map_err(|e| open_err(e.to_string()))?;
            let latest = if path.exists() { latest_scores(&path).map_err(|e| open_err(e.to_string()))? } else { None };
            let log = SessionLog::open(dir, id, state.cfg.server.history).map_err(|e| open_err(e.to_string()))?;
            let s = Session::start(id, log, latest.clone(), state.deps.clone()).map_err(|e| open_err(e.to_string()))?;
            lock(&state.sessions).insert(id.to_string(), Arc::clone(&s));
            (s, control::STARTED, latest)
        }
    };
    session.attach(conn.id, conn.tx.clone());
    conn.sessions.insert(id.to_string(), (Arc::clone(&session), seq));
    session.send(WireMessage::control(id, action));
    if let Some(set) = latest {
        session.send(WireMessage::biomarkers(id, &set));
    }
    Ok(())
}

async fn end_session(state: &Arc<AppState>, conn: &mut Conn, session: &Arc<Session>) {
    lock(&state.sessions).remove(&session.id);
    session.end().await;
    session.send(WireMessage::control(&session.id, control::ENDED));
    session.detach(conn.id);
    conn.sessions.remove(&session.id);
}
