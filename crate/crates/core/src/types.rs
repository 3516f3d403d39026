//! Shared domain types.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Who produced an utterance. Inputs arrive already diarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Speaker {
    Patient,
    Agent,
    Other,
}

impl Speaker {
    pub fn as_str(self) -> &'static str {
        match self {
            Speaker::Patient => "PATIENT",
            Speaker::Agent => "AGENT",
            Speaker::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PATIENT" => Some(Speaker::Patient),
            "AGENT" => Some(Speaker::Agent),
            "OTHER" => Some(Speaker::Other),
            _ => None,
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One diarized, timestamped speech segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub session_id: String,
    pub speaker: Speaker,
    pub text: String,
    pub t_start_ms: i64,
    pub t_end_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_ref: Option<String>,
}

impl UtteranceRecord {
    pub fn new(
        session_id: impl Into<String>,
        speaker: Speaker,
        text: impl Into<String>,
        t_start_ms: i64,
        t_end_ms: i64,
    ) -> Result<Self> {
        let rec = UtteranceRecord {
            session_id: session_id.into(),
            speaker,
            text: text.into(),
            t_start_ms,
            t_end_ms,
            audio_ref: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_end_ms <= self.t_start_ms {
            return Err(Error::invalid(alloc::format!(
                "utterance ends at {} ms, not after its start at {} ms",
                self.t_end_ms,
                self.t_start_ms
            )));
        }
        if self.text.trim().is_empty() && self.audio_ref.is_none() {
            return Err(Error::invalid("utterance has neither text nor audio"));
        }
        Ok(())
    }

    pub fn duration_ms(&self) -> i64 {
        self.t_end_ms - self.t_start_ms
    }
}

/// The six biomarkers, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiomarkerKind {
    Grammar,
    Pragmatics,
    Anomia,
    TurnTaking,
    Pronunciation,
    Prosody,
}

impl BiomarkerKind {
    pub const ALL: [BiomarkerKind; 6] = [
        BiomarkerKind::Grammar,
        BiomarkerKind::Pragmatics,
        BiomarkerKind::Anomia,
        BiomarkerKind::TurnTaking,
        BiomarkerKind::Pronunciation,
        BiomarkerKind::Prosody,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BiomarkerKind::Grammar => "grammar",
            BiomarkerKind::Pragmatics => "pragmatics",
            BiomarkerKind::Anomia => "anomia",
            BiomarkerKind::TurnTaking => "turn_taking",
            BiomarkerKind::Pronunciation => "pronunciation",
            BiomarkerKind::Prosody => "prosody",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        BiomarkerKind::ALL.iter().copied().find(|k| k.name() == s.trim())
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_acoustic(self) -> bool {
        matches!(self, BiomarkerKind::Pronunciation | BiomarkerKind::Prosody)
    }
}

impl fmt::Display for BiomarkerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-biomarker scores at one point in time. Absent scores were not
/// computable (missing data) and are excluded from the composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiomarkerScoreSet {
    pub timestamp_ms: i64,
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

impl BiomarkerScoreSet {
    /// Builds a score set and derives the composite from the present scores.
    pub fn new(timestamp_ms: i64, scores: [Option<f64>; 6]) -> Result<Self> {
        for (kind, s) in BiomarkerKind::ALL.iter().zip(scores.iter()) {
            if let Some(v) = s {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::domain(alloc::format!("{kind} score {v} outside [0,1]")));
                }
            }
        }
        let mut set = BiomarkerScoreSet {
            timestamp_ms,
            grammar: scores[0],
            pragmatics: scores[1],
            anomia: scores[2],
            turn_taking: scores[3],
            pronunciation: scores[4],
            prosody: scores[5],
            composite: None,
        };
        set.composite = composite_of(&scores);
        Ok(set)
    }

    pub fn get(&self, kind: BiomarkerKind) -> Option<f64> {
        self.scores()[kind.index()]
    }

    pub fn scores(&self) -> [Option<f64>; 6] {
        [
            self.grammar,
            self.pragmatics,
            self.anomia,
            self.turn_taking,
            self.pronunciation,
            self.prosody,
        ]
    }

    pub fn present_count(&self) -> usize {
        self.scores().iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.present_count() == 0
    }

    /// Returns a copy with `kind` dropped and the composite recomputed.
    pub fn without(&self, kind: BiomarkerKind) -> Self {
        let mut scores = self.scores();
        scores[kind.index()] = None;
        let mut out = self.clone();
        out.grammar = scores[0];
        out.pragmatics = scores[1];
        out.anomia = scores[2];
        out.turn_taking = scores[3];
        out.pronunciation = scores[4];
        out.prosody = scores[5];
        out.composite = composite_of(&scores);
        out
    }
}

/// Arithmetic mean of the present scores.
pub fn composite_of(scores: &[Option<f64>]) -> Option<f64> {
    let (sum, n) = scores
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SeverityLevel {
    None,
    Mild,
    Moderate,
    Severe,
}

impl SeverityLevel {
    pub const ALL: [SeverityLevel; 4] = [
        SeverityLevel::None,
        SeverityLevel::Mild,
        SeverityLevel::Moderate,
        SeverityLevel::Severe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeverityLevel::None => "NONE",
            SeverityLevel::Mild => "MILD",
            SeverityLevel::Moderate => "MODERATE",
            SeverityLevel::Severe => "SEVERE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        SeverityLevel::ALL.iter().copied().find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffRange {
    pub level: SeverityLevel,
    pub min: u8,
    pub max: u8,
}

/// MMSE ranges per severity level. Ranges must tile 0..=30 without gaps,
/// with more severe levels covering lower scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffTable {
    ranges: Vec<CutoffRange>,
}

impl Default for CutoffTable {
    fn default() -> Self {
        CutoffTable {
            ranges: alloc::vec![
                CutoffRange { level: SeverityLevel::None, min: 24, max: 30 },
                CutoffRange { level: SeverityLevel::Mild, min: 18, max: 23 },
                CutoffRange { level: SeverityLevel::Moderate, min: 10, max: 17 },
                CutoffRange { level: SeverityLevel::Severe, min: 0, max: 9 },
            ],
        }
    }
}

impl CutoffTable {
    pub fn new(mut ranges: Vec<CutoffRange>) -> Result<Self> {
        ranges.sort_by_key(|r| r.min);
        let mut expected = 0u8;
        for (i, r) in ranges.iter().enumerate() {
            if r.min != expected || r.max < r.min {
                return Err(Error::invalid("MMSE cutoff ranges must partition 0..=30"));
            }
            if i > 0 && r.level >= ranges[i - 1].level {
                return Err(Error::invalid(
                    "MMSE cutoff levels must get less severe as the score rises",
                ));
            }
            expected = r.max + 1;
        }
        if expected != 31 {
            return Err(Error::invalid("MMSE cutoff ranges must partition 0..=30"));
        }
        ranges.reverse();
        Ok(CutoffTable { ranges })
    }

    pub fn ranges(&self) -> &[CutoffRange] {
        &self.ranges
    }
}

pub fn severity_from_mmse(mmse: i64, cutoffs: &CutoffTable) -> Result<SeverityLevel> {
    if !(0..=30).contains(&mmse) {
        return Err(Error::domain(alloc::format!("MMSE {mmse} outside 0..=30")));
    }
    cutoffs
        .ranges
        .iter()
        .find(|r| (r.min as i64..=r.max as i64).contains(&mmse))
        .map(|r| r.level)
        .ok_or_else(|| Error::domain(alloc::format!("MMSE {mmse} not covered by cutoff table")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Dementia,
    Control,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Dementia => "DEMENTIA",
            Label::Control => "CONTROL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DEMENTIA" | "1" => Some(Label::Dementia),
            "CONTROL" | "0" => Some(Label::Control),
            _ => None,
        }
    }

    /// Binary class used by the classifiers: 1 for dementia.
    pub fn class(self) -> u8 {
        match self {
            Label::Dementia => 1,
            Label::Control => 0,
        }
    }
}

/// One recording for batch analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSample {
    pub sample_id: String,
    pub utterances: Vec<UtteranceRecord>,
    pub mmse: Option<u8>,
    pub label: Option<Label>,
}

impl CorpusSample {
    pub fn new(
        sample_id: impl Into<String>,
        mut utterances: Vec<UtteranceRecord>,
        mmse: Option<u8>,
        label: Option<Label>,
    ) -> Result<Self> {
        if let Some(m) = mmse {
            if m > 30 {
                return Err(Error::domain(alloc::format!("MMSE {m} outside 0..=30")));
            }
        }
        // Stable sort keeps same-start utterances in input order.
        utterances.sort_by_key(|u| u.t_start_ms);
        Ok(CorpusSample { sample_id: sample_id.into(), utterances, mmse, label })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    Utterance,
    Scores,
    Response,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "UPPERCASE")]
pub enum EventPayload {
    Utterance(UtteranceRecord),
    Scores(BiomarkerScoreSet),
    Response { text: String },
    Error { code: String, message: String },
}

impl EventPayload {
    pub fn kind(&self) -> EventKind {
        match self {
            EventPayload::Utterance(_) => EventKind::Utterance,
            EventPayload::Scores(_) => EventKind::Scores,
            EventPayload::Response { .. } => EventKind::Response,
            EventPayload::Error { .. } => EventKind::Error,
        }
    }
}

/// One persisted interaction record. `wall_time` is milliseconds since the
/// Unix epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    #[serde(flatten)]
    pub payload: EventPayload,
    pub wall_time: u64,
}

impl SessionEvent {
    pub fn new(payload: EventPayload, wall_time: u64) -> Self {
        SessionEvent { payload, wall_time }
    }

    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }
}
