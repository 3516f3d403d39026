//! Disrupted turn taking as the rate of interruptions: a different
//! speaker's utterance starting at or before the end of the utterance in
//! progress (gap <= 0 ms).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Speaker, UtteranceRecord};

/// Reference maximum, in interruptions per minute, mapped to score 1.
pub const DEFAULT_TURN_TAKING_CAP: f64 = 6.0;

/// Each utterance counts at most once, however many utterances it overlaps.
pub fn count_interruptions(utterances: &[UtteranceRecord]) -> usize {
    let mut ordered: Vec<&UtteranceRecord> = utterances.iter().collect();
    ordered.sort_by_key(|u| u.t_start_ms);
    let mut latest_end: BTreeMap<Speaker, i64> = BTreeMap::new();
    let mut count = 0;
    for u in ordered {
        if latest_end.iter().any(|(s, &end)| *s != u.speaker && u.t_start_ms <= end) {
            count += 1;
        }
        let e = latest_end.entry(u.speaker).or_insert(i64::MIN);
        *e = (*e).max(u.t_end_ms);
    }
    count
}

fn session_span_ms(utterances: &[UtteranceRecord]) -> Result<i64> {
    let start = utterances.iter().map(|u| u.t_start_ms).min().ok_or(Error::ZeroDuration)?;
    let end = utterances.iter().map(|u| u.t_end_ms).max().ok_or(Error::ZeroDuration)?;
    if end <= start {
        return Err(Error::ZeroDuration);
    }
    Ok(end - start)
}

/// Interruptions per minute of session time (first start to last end).
pub fn interruption_rate(utterances: &[UtteranceRecord]) -> Result<f64> {
    let span = session_span_ms(utterances)?;
    Ok(count_interruptions(utterances) as f64 * 60_000.0 / span as f64)
}

pub fn turn_taking_score(utterances: &[UtteranceRecord], cap: f64) -> Result<f64> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::invalid("turn-taking cap must be positive"));
    }
    Ok((interruption_rate(utterances)? / cap).clamp(0.0, 1.0))
}
