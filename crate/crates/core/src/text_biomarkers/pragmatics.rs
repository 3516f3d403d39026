//! Pragmatic impairment as lack of local semantic coherence: the cosine
//! between the mean word vector of the current utterance and that of the
//! preceding utterances, mapped to `[0, 1]` so that on-topic speech scores
//! 0 and opposite-topic speech scores 1.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linguistics::{Tag, TaggedToken, Tagger, tokenize};
use crate::types::{Speaker, UtteranceRecord};

/// Number of preceding utterances forming the topic context.
pub const DEFAULT_COHERENCE_WINDOW: usize = 2;

/// Word embeddings keyed by lowercase word.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordVectorLexicon {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl WordVectorLexicon {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(WordVectorLexicon { dim, vectors: BTreeMap::new() })
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(alloc::format!(
                "vector for {word:?} has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!("vector for {word:?} is not finite")));
        }
        self.vectors.insert(word.to_lowercase(), vector);
        Ok(())
    }

    /// Parses the plain-text format: one word per line followed by its
    /// whitespace-separated components. The dimension is taken from the
    /// first entry.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lex: Option<WordVectorLexicon> = None;
        for (i, line) in text.lines().enumerate() {
            let mut cols = line.split_whitespace();
            let Some(word) = cols.next() else { continue };
            if word.starts_with('#') {
                continue;
            }
            let vector = cols
                .map(|c| c.parse::<f64>())
                .collect::<core::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(i + 1, alloc::format!("{e}")))?;
            let lex = match &mut lex {
                Some(l) => l,
                None => lex.insert(
                    WordVectorLexicon::new(vector.len()).map_err(|_| Error::parse(i + 1, "empty vector"))?,
                ),
            };
            lex.insert(word, vector).map_err(|e| Error::parse(i + 1, alloc::format!("{e}")))?;
        }
        lex.ok_or_else(|| Error::parse(0, "no vectors found"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }
}

fn is_content(t: &TaggedToken) -> bool {
    t.tag.is_noun()
        || t.tag == Tag::JJ
        || t.tag == Tag::RB
        || (t.tag.is_verb() && !t.is_auxiliary())
}

/// Accumulates vectors of in-lexicon content words.
struct MeanVector {
    sum: Vec<f64>,
    n: usize,
}

impl MeanVector {
    fn new(dim: usize) -> Self {
        MeanVector { sum: alloc::vec![0.0; dim], n: 0 }
    }

    fn add_text(&mut self, text: &str, tagger: &Tagger, lexicon: &WordVectorLexicon) {
        for t in tagger.tag(&tokenize(text)) {
            if !is_content(&t) {
                continue;
            }
            if let Some(v) = lexicon.get(&t.token.surface) {
                for (s, x) in self.sum.iter_mut().zip(v) {
                    *s += x;
                }
                self.n += 1;
            }
        }
    }

    fn finish(self) -> Option<Vec<f64>> {
        let n = self.n as f64;
        (self.n > 0).then(|| self.sum.into_iter().map(|s| s / n).collect())
    }
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / libm::sqrt(na * nb)).clamp(-1.0, 1.0))
}

/// `(1 - cos(u, h)) / 2` for the current utterance against its history.
///
/// Returns [`Error::UncoverableUtterance`] when either side has no
/// content word with a vector; callers skip such utterances.
pub fn pragmatics_score(
    current: &UtteranceRecord,
    history: &[UtteranceRecord],
    tagger: &Tagger,
    lexicon: &WordVectorLexicon,
) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::invalid("coherence history is empty"));
    }
    let mut u = MeanVector::new(lexicon.dim());
    u.add_text(&current.text, tagger, lexicon);
    let mut h = MeanVector::new(lexicon.dim());
    for prev in history {
        h.add_text(&prev.text, tagger, lexicon);
    }
    let (Some(u), Some(h)) = (u.finish(), h.finish()) else {
        return Err(Error::UncoverableUtterance);
    };
    let c = cosine(&u, &h).ok_or(Error::UncoverableUtterance)?;
    Ok(((1.0 - c) / 2.0).clamp(0.0, 1.0))
}

/// Mean pragmatics score over every patient utterance that has at least one
/// preceding utterance within `window` and is coverable by the lexicon.
pub fn session_pragmatics(
    utterances: &[UtteranceRecord],
    window: usize,
    tagger: &Tagger,
    lexicon: &WordVectorLexicon,
) -> Option<f64> {
    let mut ordered: Vec<&UtteranceRecord> = utterances
        .iter()
        .filter(|u| matches!(u.speaker, Speaker::Patient | Speaker::Agent) && !u.text.trim().is_empty())
        .collect();
    ordered.sort_by_key(|u| u.t_start_ms);
    let mut total = 0.0;
    let mut n = 0usize;
    for (i, u) in ordered.iter().enumerate() {
        if u.speaker != Speaker::Patient || i == 0 || window == 0 {
            continue;
        }
        let history: Vec<UtteranceRecord> =
            ordered[i.saturating_sub(window)..i].iter().map(|r| (*r).clone()).collect();
        if let Ok(s) = pragmatics_score(u, &history, tagger, lexicon) {
            total += s;
            n += 1;
        }
    }
    (n > 0).then(|| total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utt(speaker: Speaker, text: &str, t: i64) -> UtteranceRecord {
        UtteranceRecord::new("s", speaker, text, t, t + 1000).unwrap()
    }

    fn lexicon() -> WordVectorLexicon {
        WordVectorLexicon::from_text(
            "autumn 1 0 0\nleaves 1 0.2 0\nwinter 0 1 0\npizza -1 0 0\ncold 0 1 0\n",
        )
        .unwrap()
    }

    #[test]
    fn self_similarity_is_zero() {
        let a = utt(Speaker::Patient, "autumn leaves", 0);
        let s = pragmatics_score(&a, &[a.clone()], &Tagger::default(), &lexicon()).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn orthogonal_and_antipodal() {
        let t = Tagger::default();
        let autumn = utt(Speaker::Agent, "autumn", 0);
        let winter = utt(Speaker::Patient, "winter", 1000);
        let pizza = utt(Speaker::Patient, "pizza", 1000);
        assert_eq!(pragmatics_score(&winter, &[autumn.clone()], &t, &lexicon()).unwrap(), 0.5);
        assert_eq!(pragmatics_score(&pizza, &[autumn], &t, &lexicon()).unwrap(), 1.0);
    }

    #[test]
    fn uncoverable_and_empty_history() {
        let t = Tagger::default();
        let a = utt(Speaker::Agent, "autumn", 0);
        let b = utt(Speaker::Patient, "the and of", 1000);
        assert_eq!(pragmatics_score(&b, &[a.clone()], &t, &lexicon()), Err(Error::UncoverableUtterance));
        assert!(matches!(pragmatics_score(&a, &[], &t, &lexicon()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn session_mean_skips_uncoverable() {
        let t = Tagger::default();
        let utts = alloc::vec![
            utt(Speaker::Agent, "autumn", 0),
            utt(Speaker::Patient, "the and of", 2000),
            utt(Speaker::Patient, "pizza", 4000),
        ];
        // Only the third utterance is scored; its window is the first two,
        // whose only covered word is autumn.
        assert_eq!(session_pragmatics(&utts, 2, &t, &lexicon()), Some(1.0));
        assert_eq!(session_pragmatics(&utts[..1], 2, &t, &lexicon()), None);
    }

    #[test]
    fn parse_errors() {
        assert!(WordVectorLexicon::from_text("a 1 2\nb 1\n").is_err());
        assert!(WordVectorLexicon::from_text("a 1 x\n").is_err());
        assert!(WordVectorLexicon::from_text("").is_err());
        let l = WordVectorLexicon::from_text("# comment\nWord 1 2\n").unwrap();
        assert_eq!(l.get("word"), Some(&[1.0, 2.0][..]));
        assert_eq!(l.get("WORD"), Some(&[1.0, 2.0][..]));
    }
}
