//! Tokenization, part-of-speech tagging, shallow chunking and the ten
//! grammar features scored by the altered-grammar biomarker.

mod chunker;
mod features;
mod tagger;
mod tokenize;

pub use chunker::{chunk_sentence, production_rules, Chunk, ChunkLabel};
pub use features::{
    extract_grammar_features, raw_grammar_counts, GrammarFeature, GrammarFeatureVector,
    GRAMMAR_FEATURES,
};
pub use tagger::{is_auxiliary, pos_tag, Tag, TaggedToken, Tagger, AUXILIARIES, SUBORDINATORS};
pub use tokenize::{sentences, tokenize, Token};
