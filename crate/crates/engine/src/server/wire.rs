//! JSON text frames exchanged over `/ws`.
//!
//! Every frame is one flat object with a `type` and the fields that type
//! uses; absent fields are omitted. Audio travels as base64 16-bit
//! little-endian PCM.

use base64::Engine as _;
use cogspeech_core::dsp::AudioBuffer;
use cogspeech_core::{BiomarkerScoreSet, Speaker};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::wav::{pcm_from_le_bytes, pcm_to_le_bytes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageType {
    AudioChunk,
    Transcript,
    Response,
    Biomarkers,
    Error,
    SessionControl,
}

impl MessageType {
    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(Value::String(s.into())).ok()
    }
}

pub mod codes {
    pub const BAD_MESSAGE: &str = "BAD_MESSAGE";
    pub const UNKNOWN_TYPE: &str = "UNKNOWN_TYPE";
    pub const NO_SESSION: &str = "NO_SESSION";
    pub const BAD_SESSION_ID: &str = "BAD_SESSION_ID";
    pub const BAD_SEQ: &str = "BAD_SEQ";
    pub const BAD_CONTROL: &str = "BAD_CONTROL";
    pub const BAD_TRANSCRIPT: &str = "BAD_TRANSCRIPT";
    pub const BAD_AUDIO: &str = "BAD_AUDIO";
    pub const CHUNK_TOO_LARGE: &str = "CHUNK_TOO_LARGE";
    pub const SCORING_FAILED: &str = "SCORING_FAILED";
}

/// Control actions carried in `text` of a `session_control` frame.
pub mod control {
    pub const START: &str = "start";
    pub const END: &str = "end";
    pub const STARTED: &str = "started";
    pub const RESUMED: &str = "resumed";
    pub const ENDED: &str = "ended";
}

/// The present scores of a set, without its timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pragmatics: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_taking: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pronunciation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prosody: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<f64>,
}

impl From<&BiomarkerScoreSet> for ScoreValues {
    fn from(s: &BiomarkerScoreSet) -> Self {
        ScoreValues {
            grammar: s.grammar,
            pragmatics: s.pragmatics,
            anomia: s.anomia,
            turn_taking: s.turn_taking,
            pronunciation: s.pronunciation,
            prosody: s.prosody,
            composite: s.composite,
        }
    }
}

impl ScoreValues {
    /// Rebuilds the score set; the composite is recomputed from the
    /// individual scores.
    pub fn to_set(&self, timestamp_ms: i64) -> cogspeech_core::Result<BiomarkerScoreSet> {
        BiomarkerScoreSet::new(
            timestamp_ms,
            [self.grammar, self.pragmatics, self.anomia, self.turn_taking, self.pronunciation, self.prosody],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<Speaker>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start_ms: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_ms: Option<i64>,
    #[serde(default, rename = "final", skip_serializing_if = "Option::is_none")]
    pub is_final: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcm_b64: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl WireMessage {
    pub fn new(kind: MessageType) -> Self {
        WireMessage {
            kind,
            session_id: None,
            seq: None,
            text: None,
            speaker: None,
            t_start_ms: None,
            t_end_ms: None,
            is_final: None,
            pcm_b64: None,
            sample_rate: None,
            scores: None,
            timestamp_ms: None,
            code: None,
            message: None,
        }
    }

    fn in_session(mut self, session_id: &str) -> Self {
        self.session_id = Some(session_id.into());
        self
    }

    pub fn control(session_id: &str, action: &str) -> Self {
        WireMessage { text: Some(action.into()), ..Self::new(MessageType::SessionControl).in_session(session_id) }
    }

    pub fn transcript(session_id: &str, speaker: Speaker, text: &str, t_start_ms: i64, t_end_ms: i64) -> Self {
        WireMessage {
            text: Some(text.into()),
            speaker: Some(speaker),
            t_start_ms: Some(t_start_ms),
            t_end_ms: Some(t_end_ms),
            is_final: Some(true),
            ..Self::new(MessageType::Transcript).in_session(session_id)
        }
    }

    pub fn audio(session_id: &str, pcm: &[i16], sample_rate: u32) -> Self {
        WireMessage {
            pcm_b64: Some(base64::engine::general_purpose::STANDARD.encode(pcm_to_le_bytes(pcm))),
            sample_rate: Some(sample_rate),
            ..Self::new(MessageType::AudioChunk).in_session(session_id)
        }
    }

    pub fn response(session_id: &str, text: &str) -> Self {
        WireMessage { text: Some(text.into()), ..Self::new(MessageType::Response).in_session(session_id) }
    }

    pub fn biomarkers(session_id: &str, scores: &BiomarkerScoreSet) -> Self {
        WireMessage {
            scores: Some(scores.into()),
            timestamp_ms: Some(scores.timestamp_ms),
            ..Self::new(MessageType::Biomarkers).in_session(session_id)
        }
    }

    pub fn error(session_id: Option<&str>, code: &str, message: impl Into<String>) -> Self {
        WireMessage {
            session_id: session_id.map(Into::into),
            code: Some(code.into()),
            message: Some(message.into()),
            ..Self::new(MessageType::Error)
        }
    }

    pub fn with_seq(mut self, seq: u64) -> Self {
        self.seq = Some(seq);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }
}

/// A frame that could not be accepted, with whatever addressing it had.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub code: &'static str,
    pub message: String,
    pub session_id: Option<String>,
}

impl Rejection {
    pub fn new(code: &'static str, message: impl Into<String>, session_id: Option<&str>) -> Self {
        Rejection { code, message: message.into(), session_id: session_id.map(Into::into) }
    }
}

/// Parses one text frame.
pub fn parse_message(text: &str) -> Result<WireMessage, Rejection> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Rejection::new(codes::BAD_MESSAGE, format!("invalid JSON: {e}"), None))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Rejection::new(codes::BAD_MESSAGE, "frame is not a JSON object", None))?;
    let session_id = obj.get("session_id").and_then(Value::as_str);
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Rejection::new(codes::BAD_MESSAGE, "missing string field \"type\"", session_id))?;
    if MessageType::parse(kind).is_none() {
        return Err(Rejection::new(codes::UNKNOWN_TYPE, format!("unknown message type {kind:?}"), session_id));
    }
    serde_json::from_value(value.clone()).map_err(|e| Rejection::new(codes::BAD_MESSAGE, e.to_string(), session_id))
}

/// Decodes the PCM of an `audio_chunk`, rejecting chunks longer than
/// `max_chunk_ms`.
pub fn decode_audio(msg: &WireMessage, max_chunk_ms: u64) -> Result<AudioBuffer, Rejection> {
    let sid = msg.session_id.as_deref();
    let bad = |m: String| Rejection::new(codes::BAD_AUDIO, m, sid);
    let rate = match msg.sample_rate {
        Some(r) if r > 0 => r,
        _ => return Err(bad("missing or zero sample_rate".into())),
    };
    let b64 = msg.pcm_b64.as_deref().ok_or_else(|| bad("missing pcm_b64".into()))?;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(b64)
        .map_err(|e| bad(format!("pcm_b64 is not base64: {e}")))?;
    let pcm = pcm_from_le_bytes(&bytes).ok_or_else(|| bad("odd number of PCM bytes".into()))?;
    if pcm.is_empty() {
        return Err(bad("empty audio chunk".into()));
    }
    let ms = pcm.len() as u64 * 1000 / u64::from(rate);
    if ms > max_chunk_ms {
        return Err(Rejection::new(
            codes::CHUNK_TOO_LARGE,
            format!("{} samples at {rate} Hz is {ms} ms, limit {max_chunk_ms} ms", pcm.len()),
            sid,
        ));
    }
    AudioBuffer::from_pcm_i16(&pcm, rate).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names_and_order() {
        let m = WireMessage::transcript("s1", Speaker::Patient, "Hello", 0, 900).with_seq(3);
        assert_eq!(
            m.to_json(),
            r#"{"type":"transcript","session_id":"s1","seq":3,"text":"Hello","speaker":"PATIENT","t_start_ms":0,"t_end_ms":900,"final":true}"#
        );
        assert_eq!(parse_message(&m.to_json()).unwrap(), m);
        let set = BiomarkerScoreSet::new(5000, [Some(0.5), None, Some(0.25), None, None, None]).unwrap();
        let b = WireMessage::biomarkers("s1", &set);
        assert_eq!(
            b.to_json(),
            r#"{"type":"biomarkers","session_id":"s1","scores":{"grammar":0.5,"anomia":0.25,"composite":0.375},"timestamp_ms":5000}"#
        );
        assert_eq!(b.scores.unwrap().to_set(5000).unwrap(), set);
    }

    #[test]
    fn rejections_keep_addressing() {
        assert_eq!(parse_message("{").unwrap_err().code, codes::BAD_MESSAGE);
        assert_eq!(parse_message("[1]").unwrap_err().code, codes::BAD_MESSAGE);
        let r = parse_message(r#"{"type":"ping","session_id":"a"}"#).unwrap_err();
        assert_eq!((r.code, r.session_id.as_deref()), (codes::UNKNOWN_TYPE, Some("a")));
        let r = parse_message(r#"{"type":"transcript","session_id":"a","seq":"x"}"#).unwrap_err();
        assert_eq!(r.code, codes::BAD_MESSAGE);
        assert_eq!(parse_message(r#"{"type":"transcript","bogus":1}"#).unwrap_err().code, codes::BAD_MESSAGE);
        assert_eq!(parse_message(r#"{"session_id":"a"}"#).unwrap_err().code, codes::BAD_MESSAGE);
    }

    #[test]
    fn audio_rules() {
        let ok = WireMessage::audio("s", &vec![1i16; 4000], 16_000);
        let a = decode_audio(&ok, 1000).unwrap();
        assert_eq!((a.len(), a.sample_rate_hz()), (4000, 16_000));
        assert_eq!(a.to_pcm_i16(), vec![1i16; 4000]);

        let empty = WireMessage::audio("s", &[], 16_000);
        assert_eq!(decode_audio(&empty, 1000).unwrap_err().code, codes::BAD_AUDIO);
        let big = WireMessage::audio("s", &vec![0i16; 20_000], 16_000);
        assert_eq!(decode_audio(&big, 1000).unwrap_err().code, codes::CHUNK_TOO_LARGE);
        assert!(decode_audio(&WireMessage::audio("s", &vec![0i16; 16_000], 16_000), 1000).is_ok());

        let mut garbled = ok.clone();
        garbled.pcm_b64 = Some("@@@".into());
        assert_eq!(decode_audio(&garbled, 1000).unwrap_err().code, codes::BAD_AUDIO);
        let mut odd = ok.clone();
        odd.pcm_b64 = Some(base64::engine::general_purpose::STANDARD.encode([1u8, 2, 3]));
        assert_eq!(decode_audio(&odd, 1000).unwrap_err().code, codes::BAD_AUDIO);
        let mut norate = ok;
        norate.sample_rate = None;
        assert_eq!(decode_audio(&norate, 1000).unwrap_err().code, codes::BAD_AUDIO);
    }
}
