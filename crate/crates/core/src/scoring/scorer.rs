use alloc::string::String;
use alloc::vec::Vec;

use super::config::{BiomarkerResources, ScoringConfig};
use crate::dsp::AudioBuffer;
use crate::error::{Error, Result};
use crate::linguistics::extract_grammar_features;
use crate::models::{ProbabilisticClassifier, TrainedClassifier};
use crate::text_biomarkers::{anomia_score, grammar_score, session_pragmatics, turn_taking_score};
use crate::types::{BiomarkerKind, BiomarkerScoreSet, UtteranceRecord};

fn acoustic_score(
    model: Option<&TrainedClassifier>,
    names: &[String],
    rows: &[Vec<f64>],
) -> Result<Option<f64>> {
    let Some(model) = model else { return Ok(None) };
    if rows.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for row in rows {
        total += model.predict_proba(&model.project(names, row)?);
    }
    Ok(Some(total / rows.len() as f64))
}

/// Scores everything observed so far. A biomarker whose input is missing
/// is left out rather than zero-filled.
///
/// `chunk_rows` are acoustic feature rows in registry order.
pub fn compute_scores(
    utterances: &[UtteranceRecord],
    chunk_rows: &[Vec<f64>],
    res: &BiomarkerResources,
    cfg: &ScoringConfig,
    timestamp_ms: i64,
) -> Result<BiomarkerScoreSet> {
    let mut scores = [None; 6];
    let on = |k: BiomarkerKind| cfg.is_enabled(k);

    if on(BiomarkerKind::Grammar) {
        match extract_grammar_features(utterances, &res.tagger, &res.grammar.scaler) {
            Ok(f) => scores[BiomarkerKind::Grammar.index()] = Some(grammar_score(&f, &res.grammar)?),
            Err(Error::NoPatientSpeech) => {}
            Err(e) => return Err(e),
        }
    }
    if on(BiomarkerKind::Pragmatics) {
        scores[BiomarkerKind::Pragmatics.index()] =
            session_pragmatics(utterances, cfg.coherence_window, &res.tagger, &res.lexicon);
    }
    if on(BiomarkerKind::Anomia) {
        match anomia_score(utterances, &res.tagger, &cfg.fillers, &cfg.anomia) {
            Ok(s) => scores[BiomarkerKind::Anomia.index()] = Some(s),
            Err(Error::NoTimedSpeech) => {}
            Err(e) => return Err(e),
        }
    }
    if on(BiomarkerKind::TurnTaking) {
        match turn_taking_score(utterances, cfg.turn_taking_cap) {
            Ok(s) => scores[BiomarkerKind::TurnTaking.index()] = Some(s),
            Err(Error::ZeroDuration) => {}
            Err(e) => return Err(e),
        }
    }
    let names = res.acoustic.registry().names();
    if on(BiomarkerKind::Pronunciation) {
        scores[BiomarkerKind::Pronunciation.index()] =
            acoustic_score(res.pronunciation_model.as_ref(), &names, chunk_rows)?;
    }
    if on(BiomarkerKind::Prosody) {
        scores[BiomarkerKind::Prosody.index()] =
            acoustic_score(res.prosody_model.as_ref(), &names, chunk_rows)?;
    }
    BiomarkerScoreSet::new(timestamp_ms, scores)
}

/// Buffered state of one live or replayed session.
#[derive(Debug, Clone)]
pub struct SessionScorer {
    session_id: String,
    config: ScoringConfig,
    utterances: Vec<UtteranceRecord>,
    audio_rate: Option<u32>,
    pending: Vec<f64>,
    chunk_rows: Vec<Vec<f64>>,
    last_emit_ms: i64,
    last_timestamp: Option<i64>,
}

impl SessionScorer {
    pub fn new(session_id: impl Into<String>, config: ScoringConfig) -> Result<Self> {
        config.validate()?;
        Ok(SessionScorer {
            session_id: session_id.into(),
            config,
            utterances: Vec::new(),
            audio_rate: None,
            pending: Vec::new(),
            chunk_rows: Vec::new(),
            last_emit_ms: 0,
            last_timestamp: None,
        })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn config(&self) -> &ScoringConfig {
        &self.config
    }

    /// Toggles one biomarker for later emissions.
    pub fn set_enabled(&mut self, kind: BiomarkerKind, on: bool) {
        if on {
            self.config.enabled.insert(kind);
        } else {
            self.config.enabled.remove(&kind);
        }
    }

    /// Utterances ordered by start time.
    pub fn utterances(&self) -> Vec<UtteranceRecord> {
        let mut u = self.utterances.clone();
        u.sort_by_key(|r| r.t_start_ms);
        u
    }

    pub fn chunk_count(&self) -> usize {
        self.chunk_rows.len()
    }

    pub fn pending_samples(&self) -> usize {
        self.pending.len()
    }

    pub fn last_emit_ms(&self) -> i64 {
        self.last_emit_ms
    }

    fn check_session(&self, id: &str) -> Result<()> {
        if id != self.session_id {
            return Err(Error::WrongSession { expected: self.session_id.clone(), got: id.into() });
        }
        Ok(())
    }

    pub fn ingest_utterance(&mut self, u: UtteranceRecord) -> Result<()> {
        self.check_session(&u.session_id)?;
        u.validate()?;
        self.utterances.push(u);
        Ok(())
    }

    /// Appends audio. Every piece of a session must share one sample rate.
    pub fn ingest_audio(&mut self, session_id: &str, audio: &AudioBuffer) -> Result<()> {
        self.check_session(session_id)?;
        match self.audio_rate {
            Some(r) if r != audio.sample_rate_hz() => {
                return Err(Error::invalid(alloc::format!(
                    "session audio is {r} Hz, got {} Hz",
                    audio.sample_rate_hz()
                )));
            }
            _ => self.audio_rate = Some(audio.sample_rate_hz()),
        }
        self.pending.extend_from_slice(audio.samples());
        Ok(())
    }

    /// Runs the acoustic pipeline on every complete buffered chunk.
    pub fn analyse_pending(&mut self, res: &BiomarkerResources) -> Result<()> {
        let Some(rate) = self.audio_rate else { return Ok(()) };
        let chunk = res.acoustic.chunk_samples(rate);
        let full = self.pending.len() / chunk;
        for i in 0..full {
            let block = AudioBuffer::new(self.pending[i * chunk..(i + 1) * chunk].to_vec(), rate)?;
            self.chunk_rows.push(res.acoustic.block_features(&block)?);
        }
        self.pending.drain(..full * chunk);
        Ok(())
    }

    fn score(&mut self, ts: i64, res: &BiomarkerResources) -> Result<Option<BiomarkerScoreSet>> {
        self.analyse_pending(res)?;
        let set = compute_scores(&self.utterances(), &self.chunk_rows, res, &self.config, ts)?;
        if set.is_empty() {
            return Ok(None);
        }
        self.last_emit_ms = ts;
        self.last_timestamp = Some(ts);
        Ok(Some(set))
    }

    /// Emits when at least one cadence period has passed since the last
    /// emission (or session start) and some biomarker has data.
    pub fn emit_scores(&mut self, now_ms: i64, res: &BiomarkerResources) -> Result<Option<BiomarkerScoreSet>> {
        if now_ms - self.last_emit_ms < self.config.cadence_ms {
            return Ok(None);
        }
        self.score(now_ms, res)
    }

    /// Emits regardless of cadence, for session end and batch scoring.
    /// Timestamps stay strictly increasing.
    pub fn flush(&mut self, now_ms: i64, res: &BiomarkerResources) -> Result<Option<BiomarkerScoreSet>> {
        let ts = match self.last_timestamp {
            Some(t) if now_ms <= t => t + 1,
            _ => now_ms,
        };
        self.score(ts, res)
    }

    /// Batch scoring of a finished recording.
    pub fn score_recording(
        session_id: &str,
        utterances: &[UtteranceRecord],
        audio: Option<&AudioBuffer>,
        res: &BiomarkerResources,
        config: ScoringConfig,
    ) -> Result<Option<BiomarkerScoreSet>> {
        let mut s = SessionScorer::new(session_id, config)?;
        for u in utterances {
            s.ingest_utterance(u.clone())?;
        }
        let mut end = utterances.iter().map(|u| u.t_end_ms).max().unwrap_or(0);
        if let Some(a) = audio {
            s.ingest_audio(session_id, a)?;
            end = end.max(libm::ceil(a.duration_s() * 1000.0) as i64);
        }
        s.flush(end, res)
    }
}
