//! Speech biomarker algorithms for conversational cognitive screening.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std` (an allocator is required). File formats, the
//! session server and the command line tool live in the `cogspeech` crate.
//!
//! The six biomarkers are oriented so that a higher score means more
//! impaired speech:
//!
//! | biomarker      | module                             | input          |
//! |----------------|------------------------------------|----------------|
//! | grammar        | [`text_biomarkers::grammar`]       | transcript     |
//! | pragmatics     | [`text_biomarkers::pragmatics`]    | transcript     |
//! | anomia         | [`text_biomarkers::anomia`]        | timed transcript |
//! | turn taking    | [`text_biomarkers::turn_taking`]   | timestamps     |
//! | pronunciation  | [`dsp`] + [`models`]               | audio          |
//! | prosody        | [`dsp`] + [`models`]               | audio          |
//!
//! [`scoring::SessionScorer`] ties them together on a fixed cadence.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dialogue;
pub mod dsp;
pub mod error;
pub mod linguistics;
pub mod models;
pub mod scoring;
pub mod stats;
pub mod text_biomarkers;
pub mod types;

pub use crate::error::{Error, Result};
pub use crate::types::{
    BiomarkerKind, BiomarkerScoreSet, CorpusSample, CutoffTable, EventKind, EventPayload, Label,
    SessionEvent, SeverityLevel, Speaker, UtteranceRecord,
};
