use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::chunker::production_rules;
use super::tagger::{is_auxiliary, Tag, TaggedToken, Tagger, SUBORDINATORS};
use super::tokenize::{sentences, tokenize};
use crate::error::{Error, Result};
use crate::models::Scaler;
use crate::types::{Speaker, UtteranceRecord};

/// The ten grammar features, in model coefficient order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GrammarFeature {
    CoordinatedSentences,
    SubordinatedSentences,
    ReducedSentences,
    Predicates,
    ProductionRules,
    FunctionWords,
    UniqueWords,
    TotalWords,
    CharacterLength,
    ImmediateRepetitions,
}

pub const GRAMMAR_FEATURES: [GrammarFeature; 10] = [
    GrammarFeature::CoordinatedSentences,
    GrammarFeature::SubordinatedSentences,
    GrammarFeature::ReducedSentences,
    GrammarFeature::Predicates,
    GrammarFeature::ProductionRules,
    GrammarFeature::FunctionWords,
    GrammarFeature::UniqueWords,
    GrammarFeature::TotalWords,
    GrammarFeature::CharacterLength,
    GrammarFeature::ImmediateRepetitions,
];

impl GrammarFeature {
    pub fn name(self) -> &'static str {
        match self {
            GrammarFeature::CoordinatedSentences => "coordinated_sentences",
            GrammarFeature::SubordinatedSentences => "subordinated_sentences",
            GrammarFeature::ReducedSentences => "reduced_sentences",
            GrammarFeature::Predicates => "predicates",
            GrammarFeature::ProductionRules => "production_rules",
            GrammarFeature::FunctionWords => "function_words",
            GrammarFeature::UniqueWords => "unique_words",
            GrammarFeature::TotalWords => "total_words",
            GrammarFeature::CharacterLength => "character_length",
            GrammarFeature::ImmediateRepetitions => "immediate_repetitions",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn names() -> Vec<String> {
        GRAMMAR_FEATURES.iter().map(|f| String::from(f.name())).collect()
    }
}

/// Raw counts plus their standardized values.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarFeatureVector {
    pub raw: [u64; 10],
    pub standardized: [f64; 10],
}

impl GrammarFeatureVector {
    pub fn raw(&self, f: GrammarFeature) -> u64 {
        self.raw[f.index()]
    }

    pub fn z(&self, f: GrammarFeature) -> f64 {
        self.standardized[f.index()]
    }

    pub fn from_standardized(standardized: [f64; 10]) -> Self {
        GrammarFeatureVector { raw: [0; 10], standardized }
    }
}

fn is_function_word(t: &TaggedToken) -> bool {
    matches!(t.tag, Tag::DT | Tag::IN | Tag::CC | Tag::PRP | Tag::PRPS | Tag::MD) || t.is_auxiliary()
}

fn coordinated_in(sentence: &[TaggedToken]) -> u64 {
    let verbish = |t: &TaggedToken| t.tag.is_verb() || t.tag == Tag::MD;
    sentence
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            t.tag == Tag::CC
                && sentence[..*i].iter().any(verbish)
                && sentence[i + 1..].iter().any(verbish)
        })
        .count() as u64
}

/// Raw feature counts over the concatenated patient speech.
pub fn raw_grammar_counts(utterances: &[UtteranceRecord], tagger: &Tagger) -> Result<[u64; 10]> {
    let mut ordered: Vec<&UtteranceRecord> =
        utterances.iter().filter(|u| u.speaker == Speaker::Patient).collect();
    ordered.sort_by_key(|u| u.t_start_ms);
    if ordered.iter().all(|u| u.text.trim().is_empty()) {
        return Err(Error::NoPatientSpeech);
    }

    let mut raw = [0u64; 10];
    let mut all_sentences: Vec<Vec<TaggedToken>> = Vec::new();
    let mut words: Vec<String> = Vec::new();

    for u in &ordered {
        raw[GrammarFeature::CharacterLength.index()] +=
            u.text.chars().filter(|c| !c.is_whitespace()).count() as u64;
        let tagged = tagger.tag(&tokenize(&u.text));
        for s in sentences(&tagged) {
            all_sentences.push(s.to_vec());
        }
    }

    for sentence in &all_sentences {
        raw[GrammarFeature::CoordinatedSentences.index()] += coordinated_in(sentence);
        for (i, t) in sentence.iter().enumerate() {
            let lower = t.lower();
            let prev = i.checked_sub(1).map(|p| &sentence[p]);
            if SUBORDINATORS.contains(&lower.as_str()) {
                raw[GrammarFeature::SubordinatedSentences.index()] += 1;
            }
            if matches!(t.tag, Tag::VBG | Tag::VBN) && !prev.is_some_and(|p| p.is_auxiliary()) {
                raw[GrammarFeature::ReducedSentences.index()] += 1;
            }
            if t.tag.is_verb() && !is_auxiliary(&lower) && !prev.is_some_and(|p| p.tag == Tag::TO) {
                raw[GrammarFeature::Predicates.index()] += 1;
            }
            if is_function_word(t) {
                raw[GrammarFeature::FunctionWords.index()] += 1;
            }
            if t.token.is_word() {
                words.push(lower);
            }
        }
    }

    raw[GrammarFeature::ProductionRules.index()] =
        production_rules(all_sentences.iter().map(|s| s.as_slice())).len() as u64;
    raw[GrammarFeature::TotalWords.index()] = words.len() as u64;
    raw[GrammarFeature::UniqueWords.index()] =
        words.iter().collect::<BTreeSet<_>>().len() as u64;
    raw[GrammarFeature::ImmediateRepetitions.index()] =
        words.windows(2).filter(|w| w[0] == w[1]).count() as u64;
    Ok(raw)
}

/// Extracts the grammar features of the patient's speech and standardizes
/// them with `scaler`, whose columns are matched by feature name.
pub fn extract_grammar_features(
    utterances: &[UtteranceRecord],
    tagger: &Tagger,
    scaler: &Scaler,
) -> Result<GrammarFeatureVector> {
    let raw = raw_grammar_counts(utterances, tagger)?;
    let mut standardized = [0.0; 10];
    for f in GRAMMAR_FEATURES {
        standardized[f.index()] = scaler.transform_value(f.name(), raw[f.index()] as f64)?;
    }
    Ok(GrammarFeatureVector { raw, standardized })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patient(text: &str) -> Vec<UtteranceRecord> {
        alloc::vec![UtteranceRecord::new("s", Speaker::Patient, text, 0, 1000).unwrap()]
    }

    fn counts(text: &str) -> [u64; 10] {
        raw_grammar_counts(&patient(text), &Tagger::default()).unwrap()
    }

    #[test]
    fn coordinated_clause() {
        // I/PRP ran/VBD and/CC I/PRP jumped/VBD ./.
        let c = counts("I ran and I jumped.");
        assert_eq!(c[GrammarFeature::CoordinatedSentences.index()], 1);
        assert_eq!(counts("bread and butter")[GrammarFeature::CoordinatedSentences.index()], 0);
        assert_eq!(
            counts("I like bread and butter.")[GrammarFeature::CoordinatedSentences.index()],
            0
        );
    }

    #[test]
    fn repetitions_and_word_counts() {
        let c = counts("the the cat");
        assert_eq!(c[GrammarFeature::ImmediateRepetitions.index()], 1);
        assert_eq!(c[GrammarFeature::TotalWords.index()], 3);
        assert_eq!(c[GrammarFeature::UniqueWords.index()], 2);
        assert_eq!(c[GrammarFeature::CharacterLength.index()], 9);
    }

    #[test]
    fn reduced_clause() {
        // Walking/VBG is clause initial without an auxiliary.
        let c = counts("Walking home, he ate.");
        assert_eq!(c[GrammarFeature::ReducedSentences.index()], 1);
        assert_eq!(counts("he was walking.")[GrammarFeature::ReducedSentences.index()], 0);
    }

    #[test]
    fn subordinators_predicates_function_words() {
        let c = counts("I stayed home because it was raining and I wanted to rest.");
        assert_eq!(c[GrammarFeature::SubordinatedSentences.index()], 1);
        // stayed/VBD raining/VBG wanted/VBD; `was` is auxiliary, `rest` is tagged NN.
        assert_eq!(c[GrammarFeature::Predicates.index()], 3);
        // I, because, it, was, and, I
        assert_eq!(c[GrammarFeature::FunctionWords.index()], 6);
    }

    #[test]
    fn only_patient_speech_counts() {
        let mut utts = patient("hello there.");
        utts.push(UtteranceRecord::new("s", Speaker::Agent, "a b c d e f", 1000, 2000).unwrap());
        let c = raw_grammar_counts(&utts, &Tagger::default()).unwrap();
        assert_eq!(c[GrammarFeature::TotalWords.index()], 2);
    }

    #[test]
    fn no_patient_speech_is_an_error() {
        let utts =
            alloc::vec![UtteranceRecord::new("s", Speaker::Agent, "hello", 0, 1000).unwrap()];
        assert_eq!(raw_grammar_counts(&utts, &Tagger::default()), Err(Error::NoPatientSpeech));
        assert_eq!(raw_grammar_counts(&[], &Tagger::default()), Err(Error::NoPatientSpeech));
    }

    #[test]
    fn standardization_uses_scaler() {
        let names = GrammarFeature::names();
        let scaler = Scaler::new(names, alloc::vec![1.0; 10], alloc::vec![2.0; 10]).unwrap();
        let v = extract_grammar_features(&patient("the the cat"), &Tagger::default(), &scaler)
            .unwrap();
        assert_eq!(v.z(GrammarFeature::TotalWords), 1.0);
        let wrong = Scaler::new(alloc::vec!["x".into()], alloc::vec![0.0], alloc::vec![1.0]).unwrap();
        assert!(matches!(
            extract_grammar_features(&patient("a"), &Tagger::default(), &wrong),
            Err(Error::MissingFeature(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn count_invariants(text in "[a-z ,.]{1,120}") {
            proptest::prop_assume!(!text.trim().is_empty());
            let c = counts(&text);
            let total = c[GrammarFeature::TotalWords.index()];
            proptest::prop_assert!(c[GrammarFeature::UniqueWords.index()] <= total);
            proptest::prop_assert!(c[GrammarFeature::FunctionWords.index()] <= total);
            proptest::prop_assert!(
                c[GrammarFeature::ImmediateRepetitions.index()] <= total.saturating_sub(1)
            );
            if tokenize(&text).len() >= 2 {
                proptest::prop_assert!(c[GrammarFeature::ProductionRules.index()] >= 1);
            }
        }

        #[test]
        fn appending_never_shrinks_length(a in "[a-z ]{1,40}", b in "[a-z]{1,10}") {
            proptest::prop_assume!(!a.trim().is_empty());
            let first = counts(&a);
            let mut utts = patient(&a);
            utts.push(UtteranceRecord::new("s", Speaker::Patient, b.as_str(), 1000, 2000).unwrap());
            let both = raw_grammar_counts(&utts, &Tagger::default()).unwrap();
            proptest::prop_assert!(both[GrammarFeature::TotalWords.index()] >= first[GrammarFeature::TotalWords.index()]);
            proptest::prop_assert!(both[GrammarFeature::CharacterLength.index()] >= first[GrammarFeature::CharacterLength.index()]);
        }
    }
}
