//! Live sessions: outbound sequencing, the scoring worker, the dialogue
//! worker and the log writer.
//!
//! Each session owns two OS threads (scoring, log writes) and one tokio
//! task (dialogue). Scoring and persistence never run on the async
//! workers, so neither can delay a response.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc as std_mpsc;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use cogspeech_core::dialogue::{ChatPrompt, Turn};
use cogspeech_core::dsp::AudioBuffer;
use cogspeech_core::scoring::{BiomarkerResources, ScoringConfig, SessionScorer};
use cogspeech_core::{BiomarkerScoreSet, EventPayload, UtteranceRecord};
use tokio::sync::{mpsc, oneshot};

use super::wire::{codes, WireMessage};
use super::LatencyStats;
use crate::responder::EngineResponder;
use crate::session_log::{LogError, SessionLog};

pub type ConnId = u64;

struct Outbound {
    conn: Option<(ConnId, mpsc::UnboundedSender<WireMessage>)>,
    next_seq: u64,
    detached_since: Option<Instant>,
}

enum ScoringInput {
    Utterance(UtteranceRecord),
    Audio(AudioBuffer),
    End(oneshot::Sender<()>),
}

enum LogInput {
    Event(EventPayload),
    Sync(std_mpsc::Sender<()>),
}

pub struct DialogueJob {
    pub text: String,
    pub received: Instant,
}

/// Everything a session's workers need from the server.
#[derive(Clone)]
pub struct SessionDeps {
    pub resources: Arc<BiomarkerResources>,
    pub scoring: ScoringConfig,
    pub responder: Arc<EngineResponder>,
    pub system_prompt: String,
    pub dialogue_turns: usize,
    pub deadline: Duration,
    pub stats: Arc<Mutex<LatencyStats>>,
}

pub struct Session {
    pub id: String,
    out: Mutex<Outbound>,
    scoring_tx: Mutex<Option<std_mpsc::Sender<ScoringInput>>>,
    dialogue_tx: Mutex<Option<mpsc::UnboundedSender<DialogueJob>>>,
    dialogue_task: Mutex<Option<tokio::task::JoinHandle<()>>>,
    log_tx: Mutex<Option<std_mpsc::Sender<LogInput>>>,
    log_thread: Mutex<Option<JoinHandle<()>>>,
    latest: Mutex<Option<BiomarkerScoreSet>>,
    audio_rate: Mutex<Option<u32>>,
    ended: AtomicBool,
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Session {
    /// Opens the session log and starts the workers. `latest` seeds the
    /// score set replayed on reconnect.
    pub fn start(
        id: &str,
        log: SessionLog,
        latest: Option<BiomarkerScoreSet>,
        deps: SessionDeps,
    ) -> Result<Arc<Session>, cogspeech_core::Error> {
        let scorer = SessionScorer::new(id, deps.scoring.clone())?;
        let (scoring_tx, scoring_rx) = std_mpsc::channel();
        let (log_tx, log_rx) = std_mpsc::channel();
        let (dialogue_tx, dialogue_rx) = mpsc::unbounded_channel();
        let session = Arc::new(Session {
            id: id.to_string(),
            out: Mutex::new(Outbound { conn: None, next_seq: 1, detached_since: Some(Instant::now()) }),
            scoring_tx: Mutex::new(Some(scoring_tx)),
            dialogue_tx: Mutex::new(Some(dialogue_tx)),
            dialogue_task: Mutex::new(None),
            log_tx: Mutex::new(Some(log_tx)),
            log_thread: Mutex::new(None),
            latest: Mutex::new(latest),
            audio_rate: Mutex::new(None),
            ended: AtomicBool::new(false),
        });

        let log_thread = std::thread::Builder::new()
            .name(format!("log-{id}"))
            .spawn({
                let sid = id.to_string();
                move || log_worker(&sid, log, log_rx)
            })
            .expect("spawning log thread");
        *lock(&session.log_thread) = Some(log_thread);

        std::thread::Builder::new()
            .name(format!("score-{id}"))
            .spawn({
                let s = Arc::clone(&session);
                let res = Arc::clone(&deps.resources);
                move || scoring_worker(&s, scorer, &res, scoring_rx)
            })
            .expect("spawning scoring thread");

        let task = tokio::spawn(dialogue_worker(Arc::clone(&session), deps, dialogue_rx));
        *lock(&session.dialogue_task) = Some(task);
        Ok(session)
    }

    /// Routes outbound messages to `conn`, replacing any earlier connection.
    pub fn attach(&self, conn: ConnId, tx: mpsc::UnboundedSender<WireMessage>) {
        let mut out = lock(&self.out);
        out.conn = Some((conn, tx));
        out.detached_since = None;
    }

    /// Stops routing to `conn` if it is still the attached connection.
    pub fn detach(&self, conn: ConnId) {
        let mut out = lock(&self.out);
        if out.conn.as_ref().is_some_and(|(c, _)| *c == conn) {
            out.conn = None;
            out.detached_since = Some(Instant::now());
        }
    }

    pub fn is_attached_to(&self, conn: ConnId) -> bool {
        lock(&self.out).conn.as_ref().is_some_and(|(c, _)| *c == conn)
    }

    pub fn detached_for(&self) -> Option<Duration> {
        lock(&self.out).detached_since.map(|t| t.elapsed())
    }

    pub fn is_ended(&self) -> bool {
        self.ended.load(Ordering::SeqCst)
    }

    /// Sends to the attached connection with the next outbound seq. Returns
    /// false, consuming no seq, when detached.
    pub fn send(&self, msg: WireMessage) -> bool {
        let mut out = lock(&self.out);
        let seq = out.next_seq;
        let Some((_, tx)) = &out.conn else { return false };
        if tx.send(msg.with_seq(seq)).is_err() {
            return false;
        }
        out.next_seq += 1;
        true
    }

    pub fn latest_scores(&self) -> Option<BiomarkerScoreSet> {
        lock(&self.latest).clone()
    }

    pub fn log(&self, payload: EventPayload) {
        if let Some(tx) = lock(&self.log_tx).as_ref() {
            let _ = tx.send(LogInput::Event(payload));
        }
    }

    /// Waits until every event logged so far is on disk.
    pub fn sync_log(&self) {
        let (tx, rx) = std_mpsc::channel();
        let sent = lock(&self.log_tx).as_ref().is_some_and(|l| l.send(LogInput::Sync(tx)).is_ok());
        if sent {
            let _ = rx.recv();
        }
    }

    /// Logs, sends and records the error.
    pub fn fail(&self, code: &str, message: impl Into<String>) {
        let message = message.into();
        self.log(EventPayload::Error { code: code.into(), message: message.clone() });
        self.send(WireMessage::error(Some(&self.id), code, message));
    }

    /// Persists, remembers and pushes one emission.
    fn deliver(&self, set: BiomarkerScoreSet) {
        self.log(EventPayload::Scores(set.clone()));
        *lock(&self.latest) = Some(set.clone());
        self.send(WireMessage::biomarkers(&self.id, &set));
    }

    /// Checks that chunks keep the session's first sample rate.
    pub fn check_rate(&self, rate: u32) -> Result<(), u32> {
        let mut r = lock(&self.audio_rate);
        match *r {
            Some(first) if first != rate => Err(first),
            _ => {
                *r = Some(rate);
                Ok(())
            }
        }
    }

    pub fn ingest_utterance(&self, u: UtteranceRecord) {
        if let Some(tx) = lock(&self.scoring_tx).as_ref() {
            let _ = tx.send(ScoringInput::Utterance(u));
        }
    }

    pub fn ingest_audio(&self, a: AudioBuffer) {
        if let Some(tx) = lock(&self.scoring_tx).as_ref() {
            let _ = tx.send(ScoringInput::Audio(a));
        }
    }

    pub fn request_response(&self, job: DialogueJob) {
        if let Some(tx) = lock(&self.dialogue_tx).as_ref() {
            let _ = tx.send(job);
        }
    }

    /// Final emission, pending responses, then the log is closed. Returns
    /// false if the session had already ended.
    pub async fn end(&self) -> bool {
        if self.ended.swap(true, Ordering::SeqCst) {
            return false;
        }
        let scoring = lock(&self.scoring_tx).take();
        if let Some(tx) = scoring {
            let (done_tx, done_rx) = oneshot::channel();
            if tx.send(ScoringInput::End(done_tx)).is_ok() {
                let _ = done_rx.await;
            }
        }
        drop(lock(&self.dialogue_tx).take());
        let task = lock(&self.dialogue_task).take();
        if let Some(task) = task {
            let _ = task.await;
        }
        drop(lock(&self.log_tx).take());
        let thread = lock(&self.log_thread).take();
        if let Some(t) = thread {
            let _ = tokio::task::spawn_blocking(move || t.join()).await;
        }
        true
    }
}

fn log_worker(session_id: &str, mut log: SessionLog, rx: std_mpsc::Receiver<LogInput>) {
    for input in rx {
        match input {
            LogInput::Event(payload) => {
                if let Err(e) = log.append(payload) {
                    report_log_error(session_id, &e);
                }
            }
            LogInput::Sync(done) => {
                let _ = done.send(());
            }
        }
    }
}

fn report_log_error(session_id: &str, e: &LogError) {
    tracing::error!(session = session_id, error = %e, "session log write failed");
}

/// Emission deadlines fall on whole multiples of the cadence after the
/// session start; the emission timestamp is that multiple.
fn scoring_worker(
    session: &Session,
    mut scorer: SessionScorer,
    res: &BiomarkerResources,
    rx: std_mpsc::Receiver<ScoringInput>,
) {
    let start = Instant::now();
    let cadence = Duration::from_millis(scorer.config().cadence_ms as u64);
    let mut tick: u32 = 1;
    let report = |r: cogspeech_core::Result<Option<BiomarkerScoreSet>>| match r {
        Ok(Some(set)) => session.deliver(set),
        Ok(None) => {}
        Err(e) => session.fail(codes::SCORING_FAILED, e.to_string()),
    };
    loop {
        let deadline = start + cadence * tick;
        let wait = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(wait) {
            Ok(ScoringInput::Utterance(u)) => {
                if let Err(e) = scorer.ingest_utterance(u) {
                    session.fail(codes::SCORING_FAILED, e.to_string());
                }
            }
            Ok(ScoringInput::Audio(a)) => {
                let r = scorer.ingest_audio(&session.id, &a).and_then(|()| scorer.analyse_pending(res));
                if let Err(e) = r {
                    session.fail(codes::SCORING_FAILED, e.to_string());
                }
            }
            Ok(ScoringInput::End(done)) => {
                let now = start.elapsed().as_millis() as i64;
                report(scorer.flush(now, res));
                let _ = done.send(());
                return;
            }
            Err(std_mpsc::RecvTimeoutError::Timeout) => {
                let now_ms = (cadence * tick).as_millis() as i64;
                report(scorer.emit_scores(now_ms, res));
                // Skip ticks missed while scoring ran long.
                let elapsed = start.elapsed();
                tick = (elapsed.as_nanos() / cadence.as_nanos()) as u32 + 1;
            }
            Err(std_mpsc::RecvTimeoutError::Disconnected) => return,
        }
    }
}

/// The prompt text may not contain the turn terminator.
fn prompt_text(text: &str) -> String {
    text.replace("</end/>", " ")
}

async fn dialogue_worker(session: Arc<Session>, deps: SessionDeps, mut rx: mpsc::UnboundedReceiver<DialogueJob>) {
    let mut history: Vec<Turn> = Vec::new();
    while let Some(job) = rx.recv().await {
        history.push(Turn::human(prompt_text(&job.text)));
        let prompt = match ChatPrompt::new(deps.system_prompt.clone(), history.clone()) {
            Ok(p) => p.truncated(deps.dialogue_turns.max(1)),
            Err(e) => {
                history.pop();
                session.fail(codes::BAD_TRANSCRIPT, e.to_string());
                continue;
            }
        };
        match deps.responder.respond(&prompt, deps.deadline).await {
            Ok(reply) => {
                if session.send(WireMessage::response(&session.id, &reply.text)) {
                    lock(&deps.stats).record(job.received.elapsed());
                }
                session.log(EventPayload::Response { text: reply.text.clone() });
                if let Some(e) = reply.fallback_from {
                    session.log(EventPayload::Error { code: e.code().into(), message: e.to_string() });
                }
                history.push(Turn::assistant(reply.text));
                let keep = history.len().saturating_sub(deps.dialogue_turns.max(2));
                history.drain(..keep);
                while history.first().is_some_and(|t| t.role != cogspeech_core::dialogue::Role::Human) {
                    history.remove(0);
                }
            }
            Err(e) => {
                history.pop();
                session.fail(e.code(), e.to_string());
            }
        }
    }
}
