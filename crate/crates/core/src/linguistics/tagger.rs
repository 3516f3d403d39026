use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::tokenize::Token;
use crate::error::{Error, Result};

/// Penn-Treebank-style tagset understood by the tagger.
///
/// Punctuation uses the Penn conventions: `.` for sentence terminals, `,`
/// for commas and `:` for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    CC,
    CD,
    DT,
    EX,
    IN,
    JJ,
    MD,
    NN,
    NNS,
    NNP,
    PDT,
    PRP,
    PRPS,
    RB,
    RP,
    TO,
    UH,
    VB,
    VBD,
    VBG,
    VBN,
    VBP,
    VBZ,
    WDT,
    WP,
    WRB,
    Terminal,
    Comma,
    Punct,
}

impl Tag {
    pub const ALL: [Tag; 29] = [
        Tag::CC,
        Tag::CD,
        Tag::DT,
        Tag::EX,
        Tag::IN,
        Tag::JJ,
        Tag::MD,
        Tag::NN,
        Tag::NNS,
        Tag::NNP,
        Tag::PDT,
        Tag::PRP,
        Tag::PRPS,
        Tag::RB,
        Tag::RP,
        Tag::TO,
        Tag::UH,
        Tag::VB,
        Tag::VBD,
        Tag::VBG,
        Tag::VBN,
        Tag::VBP,
        Tag::VBZ,
        Tag::WDT,
        Tag::WP,
        Tag::WRB,
        Tag::Terminal,
        Tag::Comma,
        Tag::Punct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::CC => "CC",
            Tag::CD => "CD",
            Tag::DT => "DT",
            Tag::EX => "EX",
            Tag::IN => "IN",
            Tag::JJ => "JJ",
            Tag::MD => "MD",
            Tag::NN => "NN",
            Tag::NNS => "NNS",
            Tag::NNP => "NNP",
            Tag::PDT => "PDT",
            Tag::PRP => "PRP",
            Tag::PRPS => "PRP$",
            Tag::RB => "RB",
            Tag::RP => "RP",
            Tag::TO => "TO",
            Tag::UH => "UH",
            Tag::VB => "VB",
            Tag::VBD => "VBD",
            Tag::VBG => "VBG",
            Tag::VBN => "VBN",
            Tag::VBP => "VBP",
            Tag::VBZ => "VBZ",
            Tag::WDT => "WDT",
            Tag::WP => "WP",
            Tag::WRB => "WRB",
            Tag::Terminal => ".",
            Tag::Comma => ",",
            Tag::Punct => ":",
        }
    }

    pub fn parse(s: &str) -> Option<Tag> {
        Tag::ALL.iter().copied().find(|t| t.as_str() == s)
    }

    pub fn is_verb(self) -> bool {
        matches!(self, Tag::VB | Tag::VBD | Tag::VBG | Tag::VBN | Tag::VBP | Tag::VBZ)
    }

    pub fn is_noun(self) -> bool {
        matches!(self, Tag::NN | Tag::NNS | Tag::NNP)
    }

    pub fn is_adjective(self) -> bool {
        self == Tag::JJ
    }

    pub fn is_adverb(self) -> bool {
        self == Tag::RB
    }

    pub fn is_pronoun(self) -> bool {
        matches!(self, Tag::PRP | Tag::PRPS)
    }

    pub fn is_punct(self) -> bool {
        matches!(self, Tag::Terminal | Tag::Comma | Tag::Punct)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: Tag,
}

impl TaggedToken {
    pub fn lower(&self) -> String {
        self.token.surface.to_lowercase()
    }

    pub fn is_auxiliary(&self) -> bool {
        is_auxiliary(&self.lower())
    }
}

/// Auxiliary and modal verbs. Hits count as function words and never as
/// predicates.
pub const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'m", "'s", "'re", "have", "has",
    "had", "having", "'ve", "'d", "do", "does", "did", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "'ll", "ca", "wo", "don't", "doesn't", "didn't", "can't",
    "won't", "couldn't", "wouldn't", "shouldn't", "isn't", "aren't", "wasn't", "weren't", "haven't",
    "hasn't", "hadn't",
];

/// Subordinating conjunctions counted by the subordinated-sentence feature.
pub const SUBORDINATORS: &[&str] = &["because", "although", "while", "if", "since", "when", "that"];

pub fn is_auxiliary(lower: &str) -> bool {
    AUXILIARIES.contains(&lower)
}

const DEFAULT_LEXICON: &str = include_str!("../../resources/lexicon.tsv");

/// Closed-class lexicon plus suffix rules. Deterministic: the same token
/// sequence always produces the same tags.
#[derive(Debug, Clone)]
pub struct Tagger {
    lexicon: BTreeMap<String, Tag>,
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::from_tsv(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

impl Tagger {
    /// Parses `word<TAB>tag` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lexicon = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(word), Some(tag), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(i + 1, "expected `word<TAB>tag`"));
            };
            let tag = Tag::parse(tag.trim())
                .ok_or_else(|| Error::parse(i + 1, alloc::format!("unknown tag {tag:?}")))?;
            lexicon.insert(word.trim().to_lowercase(), tag);
        }
        Ok(Tagger { lexicon })
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn lookup(&self, word: &str) -> Option<Tag> {
        self.lexicon.get(&word.to_lowercase()).copied()
    }

    pub fn tag(&self, tokens: &[Token]) -> Vec<TaggedToken> {
        let mut out: Vec<TaggedToken> = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let prev = out.last().map(|t| t.tag);
            let tag = self.tag_one(&tok.surface, prev);
            out.push(TaggedToken { token: tok.clone(), tag });
        }
        out
    }

    fn tag_one(&self, surface: &str, prev: Option<Tag>) -> Tag {
        if !surface.chars().any(char::is_alphanumeric) {
            return match surface {
                "." | "!" | "?" => Tag::Terminal,
                "," => Tag::Comma,
                _ => Tag::Punct,
            };
        }
        let lower = surface.to_lowercase();
        if let Some(tag) = self.lexicon.get(&lower) {
            return *tag;
        }
        if lower.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
            return Tag::CD;
        }
        let n = lower.chars().count();
        if n > 4 && lower.ends_with("ing") {
            Tag::VBG
        } else if n > 3 && lower.ends_with("ed") {
            // A regular past form right after its subject is a finite verb.
            match prev {
                Some(p) if p == Tag::PRP || p.is_noun() => Tag::VBD,
                _ => Tag::VBN,
            }
        } else if n > 4 && lower.ends_with("en") {
            Tag::VBN
        } else if n > 3 && lower.ends_with("ly") {
            Tag::RB
        } else if n > 3
            && lower.ends_with('s')
            && !lower.ends_with("ss")
            && !lower.ends_with("us")
            && !lower.ends_with("is")
        {
            Tag::NNS
        } else {
            Tag::NN
        }
    }
}

/// Tags with the bundled lexicon.
pub fn pos_tag(tokens: &[Token]) -> Vec<TaggedToken> {
    Tagger::default().tag(tokens)
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.token.surface, self.tag)
    }
}
