use std::time::Duration;

use cogspeech::config::{EngineConfig, ResponderKind};
use cogspeech::replay::{connect, Receiver, Sender};
use cogspeech::server::wire::{codes, control, MessageType, WireMessage};
use cogspeech::server::Server;
use cogspeech::session_log::{log_path, read_log, REDACTED};
use cogspeech_core::{EventPayload, Speaker};

const WAIT: Duration = Duration::from_secs(10);

fn config(dir: &std::path::Path) -> EngineConfig {
    let mut cfg = EngineConfig::default();
    cfg.server.port = 0;
    cfg.server.log_dir = dir.to_path_buf();
    cfg.live.cadence_ms = 400;
    cfg
}

async fn open(server: &Server, sid: &str) -> (Sender, Receiver) {
    let (mut tx, mut rx) = connect(&format!("ws://{}/ws", server.addr)).await.unwrap();
    tx.send(WireMessage::control(sid, control::START)).await.unwrap();
    let m = next_kind(&mut rx, MessageType::SessionControl).await;
    assert_eq!(m.text.as_deref(), Some(control::STARTED));
    (tx, rx)
}

/// Next frame of `kind`, skipping interleaved pushes and responses.
async fn next_kind(rx: &mut Receiver, kind: MessageType) -> WireMessage {
    loop {
        let m = rx.recv_timeout(WAIT).await.unwrap().expect("connection open");
        if m.kind == kind {
            return m;
        }
        assert!(matches!(m.kind, MessageType::Biomarkers | MessageType::Response), "unexpected frame {m:?}");
    }
}

async fn expect_error(rx: &mut Receiver, code: &str) -> WireMessage {
    let m = next_kind(rx, MessageType::Error).await;
    assert_eq!(m.code.as_deref(), Some(code), "{m:?}");
    m
}

fn patient(sid: &str, text: &str, t0: i64) -> WireMessage {
    WireMessage::transcript(sid, Speaker::Patient, text, t0, t0 + 800)
}

#[tokio::test(flavor = "multi_thread")]
async fn healthz_reports_version() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind(config(dir.path())).await.unwrap();
    let body: serde_json::Value =
        reqwest::get(format!("http://{}/healthz", server.addr)).await.unwrap().json().await.unwrap();
    assert_eq!(body["version"], cogspeech::VERSION);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn final_patient_transcripts_get_responses() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind(config(dir.path())).await.unwrap();
    let (mut tx, mut rx) = open(&server, "s1").await;

    let mut interim = patient("s1", "hello there", 0);
    interim.is_final = Some(false);
    tx.send(interim).await.unwrap();
    tx.send(WireMessage::transcript("s1", Speaker::Agent, "hello how are you", 900, 1500)).await.unwrap();
    tx.send(patient("s1", "Hello. How are you?", 2000)).await.unwrap();
    let r = next_kind(&mut rx, MessageType::Response).await;
    assert!(r.text.unwrap().starts_with("Hello!"));

    tx.send(patient("s1", "I love my garden", 4000)).await.unwrap();
    let r2 = next_kind(&mut rx, MessageType::Response).await;
    assert!(r2.text.unwrap().starts_with("Gardens"));
    assert!(r2.seq.unwrap() > r.seq.unwrap());

    let push = next_kind(&mut rx, MessageType::Biomarkers).await;
    let scores = push.scores.unwrap();
    assert!(scores.grammar.is_some() && scores.composite.is_some());
    assert!(push.timestamp_ms.unwrap() % 400 == 0);

    tx.send(WireMessage::control("s1", control::END)).await.unwrap();
    let ended = next_kind(&mut rx, MessageType::SessionControl).await;
    assert_eq!(ended.text.as_deref(), Some(control::ENDED));
    assert_eq!(server.latency().responses, 2);

    let events = read_log(&log_path(dir.path(), "s1").unwrap()).unwrap();
    let responses = events.iter().filter(|e| matches!(e.payload, EventPayload::Response { .. })).count();
    assert_eq!(responses, 2);
    for e in &events {
        if let EventPayload::Utterance(u) = &e.payload {
            assert_eq!(u.text, REDACTED);
        }
    }
    assert!(events.iter().any(|e| matches!(e.payload, EventPayload::Scores(_))));
    assert!(events.windows(2).all(|w| w[0].wall_time <= w[1].wall_time));
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn protocol_errors_get_one_reply_each() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind(config(dir.path())).await.unwrap();
    let (mut other_tx, mut other_rx) = open(&server, "other").await;
    let (mut tx, mut rx) = open(&server, "s2").await;

    tx.send_raw("{not json").await.unwrap();
    expect_error(&mut rx, codes::BAD_MESSAGE).await;
    tx.send_raw(r#"{"type":"dance","session_id":"s2"}"#).await.unwrap();
    expect_error(&mut rx, codes::UNKNOWN_TYPE).await;
    tx.send(patient("nope", "hello", 0)).await.unwrap();
    expect_error(&mut rx, codes::NO_SESSION).await;
    tx.send(WireMessage::audio("s2", &[], 16_000)).await.unwrap();
    expect_error(&mut rx, codes::BAD_AUDIO).await;
    tx.send(WireMessage::audio("s2", &vec![0; 20_000], 16_000)).await.unwrap();
    expect_error(&mut rx, codes::CHUNK_TOO_LARGE).await;
    tx.send(WireMessage::audio("s2", &vec![0; 4000], 16_000)).await.unwrap();
    tx.send(WireMessage::audio("s2", &vec![0; 2000], 8_000)).await.unwrap();
    expect_error(&mut rx, codes::BAD_AUDIO).await;
    tx.send_raw(&patient("s2", "hello", 0).with_seq(1).to_json()).await.unwrap();
    expect_error(&mut rx, codes::BAD_SEQ).await;
    tx.send(WireMessage::transcript("s2", Speaker::Patient, "  ", 0, 10)).await.unwrap();
    expect_error(&mut rx, codes::BAD_TRANSCRIPT).await;
    tx.send(WireMessage::transcript("s2", Speaker::Patient, "hi", 50, 10)).await.unwrap();
    expect_error(&mut rx, codes::BAD_TRANSCRIPT).await;
    tx.send(WireMessage::control("s2", "pause")).await.unwrap();
    expect_error(&mut rx, codes::BAD_CONTROL).await;
    tx.send(WireMessage::control("../etc", control::START)).await.unwrap();
    expect_error(&mut rx, codes::BAD_SESSION_ID).await;
    tx.send(WireMessage::response("s2", "I am the server")).await.unwrap();
    expect_error(&mut rx, codes::BAD_MESSAGE).await;

    // The session and its neighbour still work.
    tx.send(patient("s2", "hello", 0)).await.unwrap();
    next_kind(&mut rx, MessageType::Response).await;
    other_tx.send(patient("other", "thanks", 0)).await.unwrap();
    let r = next_kind(&mut other_rx, MessageType::Response).await;
    assert_eq!(r.text.as_deref(), Some("You are very welcome."));
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn reconnect_replays_latest_scores_once() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind(config(dir.path())).await.unwrap();
    let (mut tx, mut rx) = open(&server, "s3").await;
    tx.send(patient("s3", "I planted roses and tulips in the garden.", 0)).await.unwrap();
    let first = next_kind(&mut rx, MessageType::Biomarkers).await;
    let seq_before = first.seq.unwrap();
    drop(tx);
    drop(rx);
    tokio::time::sleep(Duration::from_millis(900)).await;

    let (mut tx, mut rx) = connect(&format!("ws://{}/ws", server.addr)).await.unwrap();
    tx.send(WireMessage::control("s3", control::START)).await.unwrap();
    let resumed = rx.recv_timeout(WAIT).await.unwrap().unwrap();
    assert_eq!(resumed.text.as_deref(), Some(control::RESUMED));
    assert!(resumed.seq.unwrap() > seq_before);
    let replayed = rx.recv_timeout(WAIT).await.unwrap().unwrap();
    assert_eq!(replayed.kind, MessageType::Biomarkers);
    assert!(replayed.timestamp_ms >= first.timestamp_ms);
    // Later pushes are fresh emissions, not repeats of the replay.
    let next = next_kind(&mut rx, MessageType::Biomarkers).await;
    assert!(next.timestamp_ms > replayed.timestamp_ms);
    assert!(next.seq > replayed.seq);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn restarted_server_replays_persisted_scores() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind(config(dir.path())).await.unwrap();
    let (mut tx, mut rx) = open(&server, "s4").await;
    tx.send(patient("s4", "the soup was warm", 0)).await.unwrap();
    let pushed = next_kind(&mut rx, MessageType::Biomarkers).await;
    server.shutdown().await;

    let server = Server::bind(config(dir.path())).await.unwrap();
    let (mut tx, mut rx) = connect(&format!("ws://{}/ws", server.addr)).await.unwrap();
    tx.send(WireMessage::control("s4", control::START)).await.unwrap();
    assert_eq!(rx.recv_timeout(WAIT).await.unwrap().unwrap().text.as_deref(), Some(control::STARTED));
    let replayed = next_kind(&mut rx, MessageType::Biomarkers).await;
    assert_eq!(replayed.scores.unwrap().grammar, pushed.scores.unwrap().grammar);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn history_flag_keeps_text() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.server.history = true;
    let server = Server::bind(cfg).await.unwrap();
    let (mut tx, mut rx) = open(&server, "s5").await;
    tx.send(patient("s5", "hello", 0)).await.unwrap();
    next_kind(&mut rx, MessageType::Response).await;
    tx.send(WireMessage::control("s5", control::END)).await.unwrap();
    next_kind(&mut rx, MessageType::SessionControl).await;
    let events = read_log(&log_path(dir.path(), "s5").unwrap()).unwrap();
    assert!(events.iter().any(|e| matches!(&e.payload, EventPayload::Utterance(u) if u.text == "hello")));
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_remote_falls_back_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    cfg.dialogue.responder = ResponderKind::Remote;
    cfg.dialogue.remote_url = Some(format!("http://127.0.0.1:{port}/complete"));
    cfg.dialogue.deadline_ms = 500;
    let server = Server::bind(cfg).await.unwrap();
    let (mut tx, mut rx) = open(&server, "s6").await;
    tx.send(patient("s6", "hello", 0)).await.unwrap();
    let r = next_kind(&mut rx, MessageType::Response).await;
    assert!(r.text.unwrap().starts_with("Hello!"));
    tx.send(WireMessage::control("s6", control::END)).await.unwrap();
    next_kind(&mut rx, MessageType::SessionControl).await;
    let events = read_log(&log_path(dir.path(), "s6").unwrap()).unwrap();
    assert!(events
        .iter()
        .any(|e| matches!(&e.payload, EventPayload::Error { code, .. } if code == "RESPONDER_TRANSPORT")));
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn idle_sessions_are_reaped() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.server.idle_timeout_s = 1;
    let server = Server::bind(cfg).await.unwrap();
    let (tx, rx) = open(&server, "s7").await;
    assert_eq!(server.session_count(), 1);
    drop((tx, rx));
    tokio::time::sleep(Duration::from_millis(2500)).await;
    assert_eq!(server.session_count(), 0);
    server.shutdown().await;
}
