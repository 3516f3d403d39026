//! Regex-style shallow chunker over tag sequences.
//!
//! Chunk grammar, applied greedily left to right:
//!
//! ```text
//! PP -> IN NP
//! NP -> DT? JJ* NN+        (NN covers NN, NNS, NNP)
//! VP -> MD? VB+ RB?        (VB covers every VB* tag)
//! ```
//!
//! Each sentence additionally emits one `S -> ...` rule whose right-hand
//! side is the top-level sequence of chunk labels and bare tags.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::tagger::{Tag, TaggedToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkLabel {
    NP,
    VP,
    PP,
}

impl ChunkLabel {
    fn as_str(self) -> &'static str {
        match self {
            ChunkLabel::NP => "NP",
            ChunkLabel::VP => "VP",
            ChunkLabel::PP => "PP",
        }
    }
}

/// A top-level constituent: either a chunk spanning `span` tokens or a
/// single unchunked token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chunk {
    Phrase { label: ChunkLabel, span: (usize, usize), rules: Vec<String> },
    Bare(Tag),
}

fn match_np(tags: &[Tag], i: usize) -> Option<usize> {
    let mut j = i;
    if tags.get(j) == Some(&Tag::DT) {
        j += 1;
    }
    while tags.get(j) == Some(&Tag::JJ) {
        j += 1;
    }
    let nouns = j;
    while tags.get(j).is_some_and(|t| t.is_noun()) {
        j += 1;
    }
    (j > nouns).then_some(j)
}

fn match_vp(tags: &[Tag], i: usize) -> Option<usize> {
    let mut j = i;
    if tags.get(j) == Some(&Tag::MD) {
        j += 1;
    }
    let verbs = j;
    while tags.get(j).is_some_and(|t| t.is_verb()) {
        j += 1;
    }
    if j == verbs {
        return None;
    }
    if tags.get(j) == Some(&Tag::RB) {
        j += 1;
    }
    Some(j)
}

fn rule(label: &str, rhs: &[Tag]) -> String {
    let mut s = String::from(label);
    s.push_str(" ->");
    for t in rhs {
        s.push(' ');
        s.push_str(t.as_str());
    }
    s
}

/// Chunks one sentence.
pub fn chunk_sentence(sentence: &[TaggedToken]) -> Vec<Chunk> {
    let tags: Vec<Tag> = sentence.iter().map(|t| t.tag).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        if tags[i] == Tag::IN {
            if let Some(end) = match_np(&tags, i + 1) {
                let np = rule("NP", &tags[i + 1..end]);
                out.push(Chunk::Phrase {
                    label: ChunkLabel::PP,
                    span: (i, end),
                    rules: alloc::vec![String::from("PP -> IN NP"), np],
                });
                i = end;
                continue;
            }
        }
        if let Some(end) = match_np(&tags, i) {
            out.push(Chunk::Phrase {
                label: ChunkLabel::NP,
                span: (i, end),
                rules: alloc::vec![rule("NP", &tags[i..end])],
            });
            i = end;
            continue;
        }
        if let Some(end) = match_vp(&tags, i) {
            out.push(Chunk::Phrase {
                label: ChunkLabel::VP,
                span: (i, end),
                rules: alloc::vec![rule("VP", &tags[i..end])],
            });
            i = end;
            continue;
        }
        out.push(Chunk::Bare(tags[i]));
        i += 1;
    }
    out
}

/// Unique rewrite rules emitted over a set of sentences.
pub fn production_rules<'a, I>(sentences: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a [TaggedToken]>,
{
    let mut rules = BTreeSet::new();
    for sentence in sentences {
        if sentence.is_empty() {
            continue;
        }
        let chunks = chunk_sentence(sentence);
        let mut top = String::from("S ->");
        for c in &chunks {
            top.push(' ');
            match c {
                Chunk::Phrase { label, rules: r, .. } => {
                    top.push_str(label.as_str());
                    rules.extend(r.iter().cloned());
                }
                Chunk::Bare(t) => top.push_str(t.as_str()),
            }
        }
        rules.insert(top);
    }
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linguistics::{pos_tag, sentences, tokenize};

    fn rules(text: &str) -> Vec<String> {
        let tagged = pos_tag(&tokenize(text));
        production_rules(sentences(&tagged)).into_iter().collect()
    }

    #[test]
    fn chunks_simple_sentence() {
        let r = rules("the old dog ran in the garden.");
        assert_eq!(
            r,
            [
                "NP -> DT JJ NN",
                "NP -> DT NN",
                "PP -> IN NP",
                "S -> NP VP PP .",
                "VP -> VBD",
            ]
        );
    }

    #[test]
    fn repeated_structure_counts_once() {
        assert_eq!(rules("the cat ran. the dog ran."), rules("the cat ran."));
    }

    #[test]
    fn punctuation_only_sentence_still_emits_s_rule() {
        assert_eq!(rules(". ."), ["S -> ."]);
        assert!(rules("").is_empty());
    }
}
