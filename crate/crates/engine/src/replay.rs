//! WebSocket client that streams recorded sessions into a server, as a
//! front end would: transcripts when an utterance ends and audio in short
//! chunks on the recording clock.

use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use cogspeech_core::dsp::AudioBuffer;
use cogspeech_core::scoring::ScoringConfig;
use cogspeech_core::{BiomarkerScoreSet, CutoffTable, UtteranceRecord};
use futures::stream::{SplitSink, SplitStream};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

use crate::batch::load_sample;
use crate::corpus::ManifestRow;
use crate::features_csv::FeatureRow;
use crate::server::wire::{control, parse_message, MessageType, WireMessage};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

/// Sending half of a connection; assigns increasing seq per session.
pub struct Sender {
    sink: SplitSink<Ws, Message>,
    next_seq: u64,
}

impl Sender {
    /// Sends with the next seq.
    pub async fn send(&mut self, msg: WireMessage) -> Result<u64> {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.send_raw(&msg.with_seq(seq).to_json()).await?;
        Ok(seq)
    }

    pub async fn send_raw(&mut self, text: &str) -> Result<()> {
        self.sink.send(Message::text(text)).await.context("sending frame")
    }

    pub async fn close(&mut self) -> Result<()> {
        self.sink.close().await.context("closing connection")
    }
}

pub struct Receiver {
    stream: SplitStream<Ws>,
}

impl Receiver {
    /// Next server frame, or `None` when the connection closes.
    pub async fn recv(&mut self) -> Result<Option<WireMessage>> {
        while let Some(frame) = self.stream.next().await {
            match frame.context("reading frame")? {
                Message::Text(t) => {
                    return parse_message(t.as_str())
                        .map(Some)
                        .map_err(|r| anyhow!("server sent an invalid frame: {}", r.message))
                }
                Message::Close(_) => return Ok(None),
                _ => {}
            }
        }
        Ok(None)
    }

    pub async fn recv_timeout(&mut self, d: Duration) -> Result<Option<WireMessage>> {
        match tokio::time::timeout(d, self.recv()).await {
            Ok(r) => r,
            Err(_) => bail!("no frame within {d:?}"),
        }
    }
}

pub async fn connect(url: &str) -> Result<(Sender, Receiver)> {
    let (ws, _) = tokio_tungstenite::connect_async_with_config(url, None, true).await.with_context(|| format!("connecting to {url}"))?;
    let (sink, stream) = ws.split();
    Ok((Sender { sink, next_seq: 1 }, Receiver { stream }))
}

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub chunk_ms: u32,
    /// Recording-clock speed-up; 0 sends as fast as possible.
    pub speed: f64,
    /// How long to wait for the server's end confirmation.
    pub end_timeout: Duration,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions { chunk_ms: 250, speed: 0.0, end_timeout: Duration::from_secs(60) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReplayOutcome {
    /// The score set pushed just before the session ended.
    pub final_scores: Option<BiomarkerScoreSet>,
    pub pushes: Vec<(Duration, BiomarkerScoreSet)>,
    pub responses: Vec<String>,
    pub errors: Vec<(String, String)>,
}

enum Item<'a> {
    Utterance(&'a UtteranceRecord),
    Chunk(Vec<i16>, u32),
}

/// Transcripts at their end time and audio chunks at their end time,
/// merged on the recording clock. Ties send audio first.
fn timeline<'a>(utts: &'a [UtteranceRecord], audio: Option<&AudioBuffer>, chunk_ms: u32) -> Vec<(i64, Item<'a>)> {
    let mut items: Vec<(i64, u8, Item<'a>)> = utts.iter().map(|u| (u.t_end_ms, 1, Item::Utterance(u))).collect();
    if let Some(a) = audio {
        let pcm = a.to_pcm_i16();
        let rate = a.sample_rate_hz();
        let step = ((u64::from(rate) * u64::from(chunk_ms)) / 1000).max(1) as usize;
        for (i, c) in pcm.chunks(step).enumerate() {
            let end_ms = ((i * step + c.len()) as u64 * 1000 / u64::from(rate)) as i64;
            items.push((end_ms, 0, Item::Chunk(c.to_vec(), rate)));
        }
    }
    items.sort_by_key(|(t, k, _)| (*t, *k));
    items.into_iter().map(|(t, _, i)| (t, i)).collect()
}

/// Streams one session and collects what the server sends back until it
/// confirms the end.
pub async fn replay_session(
    url: &str,
    session_id: &str,
    utts: &[UtteranceRecord],
    audio: Option<&AudioBuffer>,
    opts: &ReplayOptions,
) -> Result<ReplayOutcome> {
    let (mut tx, mut rx) = connect(url).await?;
    let started = Instant::now();
    let reader = tokio::spawn(async move {
        let mut out = ReplayOutcome::default();
        loop {
            let Some(msg) = rx.recv().await? else { bail!("connection closed before the session ended") };
            match msg.kind {
                MessageType::Biomarkers => {
                    let ts = msg.timestamp_ms.unwrap_or_default();
                    let set = msg.scores.ok_or_else(|| anyhow!("biomarkers frame without scores"))?.to_set(ts)?;
                    out.pushes.push((started.elapsed(), set.clone()));
                    out.final_scores = Some(set);
                }
                MessageType::Response => out.responses.push(msg.text.unwrap_or_default()),
                MessageType::Error => out.errors.push((msg.code.unwrap_or_default(), msg.message.unwrap_or_default())),
                MessageType::SessionControl if msg.text.as_deref() == Some(control::ENDED) => return Ok(out),
                _ => {}
            }
        }
    });

    tx.send(WireMessage::control(session_id, control::START)).await?;
    for (t_ms, item) in timeline(utts, audio, opts.chunk_ms) {
        if opts.speed > 0.0 {
            let due = started + Duration::from_secs_f64(t_ms.max(0) as f64 / 1000.0 / opts.speed);
            tokio::time::sleep_until(due.into()).await;
        }
        let msg = match item {
            Item::Utterance(u) => WireMessage::transcript(session_id, u.speaker, &u.text, u.t_start_ms, u.t_end_ms),
            Item::Chunk(pcm, rate) => WireMessage::audio(session_id, &pcm, rate),
        };
        tx.send(msg).await?;
    }
    tx.send(WireMessage::control(session_id, control::END)).await?;
    let out = tokio::time::timeout(opts.end_timeout, reader)
        .await
        .map_err(|_| anyhow!("session {session_id} did not end within {:?}", opts.end_timeout))?
        .context("reader task")??;
    let _ = tx.close().await;
    if let Some((code, message)) = out.errors.first() {
        bail!("server reported {code}: {message}");
    }
    Ok(out)
}

/// Replays every manifest row and returns feature rows in manifest order.
pub async fn replay_manifest(
    url: &str,
    rows: &[ManifestRow],
    scoring: &ScoringConfig,
    cutoffs: &CutoffTable,
    opts: &ReplayOptions,
) -> Result<Vec<FeatureRow>> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let (utts, audio) = load_sample(row, scoring)?;
        let sid = format!("replay-{}", row.sample_id);
        let outcome = replay_session(url, &sid, &utts, audio.as_ref(), opts)
            .await
            .with_context(|| format!("replaying {}", row.sample_id))?;
        let scores = match outcome.final_scores {
            Some(s) => s,
            None => BiomarkerScoreSet::new(0, [None; 6])?,
        };
        out.push(FeatureRow::new(row.sample_id.clone(), scores, row.mmse, cutoffs)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogspeech_core::Speaker;

    #[test]
    fn timeline_interleaves_on_recording_clock() {
        let utts = vec![
            UtteranceRecord::new("s", Speaker::Agent, "hi", 0, 400).unwrap(),
            UtteranceRecord::new("s", Speaker::Patient, "hello", 450, 500).unwrap(),
        ];
        let audio = AudioBuffer::from_pcm_i16(&vec![0i16; 9000], 16_000).unwrap();
        let t = timeline(&utts, Some(&audio), 250);
        let kinds: Vec<(i64, bool)> = t.iter().map(|(ms, i)| (*ms, matches!(i, Item::Utterance(_)))).collect();
        assert_eq!(kinds, vec![(250, false), (400, true), (500, false), (500, true), (562, false)]);
        let total: usize = t.iter().map(|(_, i)| if let Item::Chunk(c, _) = i { c.len() } else { 0 }).sum();
        assert_eq!(total, 9000);
    }
}
