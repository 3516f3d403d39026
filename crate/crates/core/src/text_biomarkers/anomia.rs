//! Anomia score: weighted sum of five per-minute rates, each divided by a
//! reference maximum and clamped to `[0, 1]`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linguistics::{Tag, Tagger, Token, tokenize};
use crate::types::{Speaker, UtteranceRecord};

pub const DEFAULT_FILLERS: &[&str] = &["um", "uh", "uhm", "ah", "ahh", "hmm", "er", "erm", "mm"];

/// Whole-token, case-insensitive filler matcher.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillerLexicon {
    words: BTreeSet<String>,
}

impl Default for FillerLexicon {
    fn default() -> Self {
        FillerLexicon::new(DEFAULT_FILLERS.iter().copied())
    }
}

impl FillerLexicon {
    pub fn new<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        FillerLexicon { words: words.into_iter().map(|w| w.trim().to_lowercase()).collect() }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }
}

pub fn count_fillers(tokens: &[Token], fillers: &FillerLexicon) -> usize {
    tokens.iter().filter(|t| fillers.contains(&t.surface)).count()
}

/// Per-minute rates over the patient's speaking time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechRates {
    pub fillers: f64,
    pub nouns: f64,
    pub verbs: f64,
    pub pronouns: f64,
    pub words: f64,
}

impl SpeechRates {
    pub fn as_array(&self) -> [f64; 5] {
        [self.fillers, self.nouns, self.verbs, self.pronouns, self.words]
    }
}

/// Weights and reference maxima for filler, noun, verb, pronoun and word
/// rates, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomiaWeights {
    pub weights: [f64; 5],
    pub caps: [f64; 5],
}

impl Default for AnomiaWeights {
    fn default() -> Self {
        AnomiaWeights { weights: [0.2; 5], caps: [20.0, 60.0, 60.0, 40.0, 200.0] }
    }
}

impl AnomiaWeights {
    pub fn new(weights: [f64; 5], caps: [f64; 5]) -> Result<Self> {
        let w = AnomiaWeights { weights, caps };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::invalid(alloc::format!(
                "anomia weights must be non-negative and sum to 1, got {sum}"
            )));
        }
        if self.caps.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::invalid("anomia rate caps must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn is_content_verb(tag: Tag, lower: &str) -> bool {
    tag.is_verb() && !crate::linguistics::is_auxiliary(lower)
}

pub fn speech_rates(
    utterances: &[UtteranceRecord],
    tagger: &Tagger,
    fillers: &FillerLexicon,
) -> Result<SpeechRates> {
    let patient: Vec<&UtteranceRecord> =
        utterances.iter().filter(|u| u.speaker == Speaker::Patient).collect();
    let speaking_ms: i64 = patient.iter().map(|u| u.duration_ms().max(0)).sum();
    if speaking_ms <= 0 {
        return Err(Error::NoTimedSpeech);
    }
    let (mut f, mut n, mut v, mut p, mut w) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for u in patient {
        let tokens = tokenize(&u.text);
        f += count_fillers(&tokens, fillers);
        for t in tagger.tag(&tokens) {
            if !t.token.is_word() {
                continue;
            }
            w += 1;
            if t.tag.is_noun() {
                n += 1;
            } else if is_content_verb(t.tag, &t.lower()) {
                v += 1;
            } else if t.tag.is_pronoun() {
                p += 1;
            }
        }
    }
    let minutes = speaking_ms as f64 / 60_000.0;
    Ok(SpeechRates {
        fillers: f as f64 / minutes,
        nouns: n as f64 / minutes,
        verbs: v as f64 / minutes,
        pronouns: p as f64 / minutes,
        words: w as f64 / minutes,
    })
}

pub fn anomia_from_rates(rates: &SpeechRates, weights: &AnomiaWeights) -> f64 {
    rates
        .as_array()
        .iter()
        .zip(weights.weights.iter().zip(&weights.caps))
        .map(|(r, (w, cap))| w * (r / cap).clamp(0.0, 1.0))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

pub fn anomia_score(
    utterances: &[UtteranceRecord],
    tagger: &Tagger,
    fillers: &FillerLexicon,
    weights: &AnomiaWeights,
) -> Result<f64> {
    Ok(anomia_from_rates(&speech_rates(utterances, tagger, fillers)?, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(a: [f64; 5]) -> SpeechRates {
        SpeechRates { fillers: a[0], nouns: a[1], verbs: a[2], pronouns: a[3], words: a[4] }
    }

    #[test]
    fn filler_examples() {
        let f = FillerLexicon::default();
        assert_eq!(count_fillers(&tokenize("um the uh"), &f), 2);
        assert_eq!(count_fillers(&tokenize("umbrella"), &f), 0);
        assert_eq!(count_fillers(&tokenize("Um, ahh"), &f), 2);
    }

    #[test]
    fn rate_examples() {
        let w = AnomiaWeights::default();
        assert_eq!(anomia_from_rates(&rates([0.0; 5]), &w), 0.0);
        assert_eq!(anomia_from_rates(&rates([20.0, 60.0, 60.0, 40.0, 200.0]), &w), 1.0);
        assert!((anomia_from_rates(&rates([10.0, 0.0, 0.0, 0.0, 0.0]), &w) - 0.1).abs() < 1e-15);
        assert_eq!(anomia_from_rates(&rates([1e9, 1e9, 1e9, 1e9, 1e9]), &w), 1.0);
    }

    #[test]
    fn counts_patient_speech_per_minute() {
        // 30 s of patient speech: "um the dog ate my cake" -> 1 filler, 2 nouns,
        // 1 verb, 1 pronoun, 6 words.
        let utts = alloc::vec![
            UtteranceRecord::new("s", Speaker::Patient, "um the dog ate my cake", 0, 30_000).unwrap(),
            UtteranceRecord::new("s", Speaker::Agent, "um um um", 30_000, 40_000).unwrap(),
        ];
        let r = speech_rates(&utts, &Tagger::default(), &FillerLexicon::default()).unwrap();
        assert_eq!(r.as_array(), [2.0, 4.0, 2.0, 2.0, 12.0]);
    }

    #[test]
    fn no_timed_speech() {
        let utts = alloc::vec![UtteranceRecord::new("s", Speaker::Agent, "hello", 0, 10).unwrap()];
        assert_eq!(
            speech_rates(&utts, &Tagger::default(), &FillerLexicon::default()),
            Err(Error::NoTimedSpeech)
        );
    }

    #[test]
    fn weights_validation() {
        assert!(AnomiaWeights::new([0.5; 5], [1.0; 5]).is_err());
        assert!(AnomiaWeights::new([0.2; 5], [1.0, 1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(AnomiaWeights::new([0.1, 0.2, 0.3, 0.2, 0.2], [1.0; 5]).is_ok());
    }

    #[test]
    fn doubling_time_halves_rates() {
        let text = "um I think the thing is uh over there";
        let a = alloc::vec![UtteranceRecord::new("s", Speaker::Patient, text, 1000, 9000).unwrap()];
        let b = alloc::vec![UtteranceRecord::new("s", Speaker::Patient, text, 2000, 18000).unwrap()];
        let ra = speech_rates(&a, &Tagger::default(), &FillerLexicon::default()).unwrap();
        let rb = speech_rates(&b, &Tagger::default(), &FillerLexicon::default()).unwrap();
        for (x, y) in ra.as_array().iter().zip(rb.as_array()) {
            assert!((x / 2.0 - y).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn score_in_unit_interval(r in proptest::array::uniform5(0.0f64..1e4)) {
            let s = anomia_from_rates(&rates(r), &AnomiaWeights::default());
            proptest::prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
