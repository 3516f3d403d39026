use alloc::string::String;
use alloc::vec::Vec;

use super::tagger::{Tag, TaggedToken};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub index: usize,
}

impl Token {
    /// True for tokens that carry at least one letter or digit.
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits on whitespace, then splits every punctuation character into its
/// own token. Apostrophes and hyphens between two alphanumerics stay inside
/// the word ("don't", "well-known"). Case is preserved.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let push = |s: String, out: &mut Vec<Token>| {
        let index = out.len();
        out.push(Token { surface: s, index });
    };
    for piece in text.split_whitespace() {
        let chars: Vec<char> = piece.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if is_punct(c) {
                let joiner = matches!(c, '\'' | '’' | '-')
                    && i > 0
                    && chars[i - 1].is_alphanumeric()
                    && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                if joiner {
                    word.push(c);
                    continue;
                }
                if !word.is_empty() {
                    push(core::mem::take(&mut word), &mut out);
                }
                push(String::from(c), &mut out);
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            push(word, &mut out);
        }
    }
    out
}

/// Splits a tagged utterance into sentences at `.`, `!` and `?`. The
/// terminal token stays with its sentence; a trailing fragment without
/// terminal punctuation is its own sentence.
pub fn sentences(tagged: &[TaggedToken]) -> Vec<&[TaggedToken]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in tagged.iter().enumerate() {
        if t.tag == Tag::Terminal {
            out.push(&tagged[start..=i]);
            start = i + 1;
        }
    }
    if start < tagged.len() {
        out.push(&tagged[start..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(surfaces("I love autumn."), ["I", "love", "autumn", "."]);
        assert!(surfaces("").is_empty());
        assert_eq!(surfaces("um, the thing"), ["um", ",", "the", "thing"]);
    }

    #[test]
    fn contractions_and_runs() {
        assert_eq!(surfaces("don't stop..."), ["don't", "stop", ".", ".", "."]);
        assert_eq!(surfaces("'quoted'"), ["'", "quoted", "'"]);
        assert_eq!(surfaces("well-known  x"), ["well-known", "x"]);
        let toks = tokenize("a b c");
        assert_eq!(toks.iter().map(|t| t.index).collect::<Vec<_>>(), [0, 1, 2]);
    }
}
