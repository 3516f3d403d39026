use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no patient speech")]
    NoPatientSpeech,
    #[error("no timed speech")]
    NoTimedSpeech,
    #[error("uncoverable utterance: no content words found in the word-vector lexicon")]
    UncoverableUtterance,
    #[error("zero-duration session")]
    ZeroDuration,
    #[error("recording too short: {0}")]
    RecordingTooShort(String),
    #[error("missing feature: {0}")]
    MissingFeature(String),
    #[error("zero variance")]
    ZeroVariance,
    #[error("single-class data: {0}")]
    SingleClass(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("wrong session: expected {expected}, got {got}")]
    WrongSession { expected: String, got: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }
}
