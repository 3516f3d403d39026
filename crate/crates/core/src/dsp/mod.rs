//! Acoustic front end: resampling, 25 ms / 10 ms framing, per-frame
//! low-level descriptors and 5 s chunk functionals.
//!
//! Recordings are cut into non-overlapping chunks *before* framing, and each
//! chunk is analysed on its own. A live session that receives audio in small
//! pieces therefore produces exactly the same features as a batch run over
//! the finished file.

mod acoustic;
mod audio;
mod fft;
mod frames;
mod functionals;
mod lld;
mod registry;

pub use acoustic::AcousticPipeline;
pub use audio::{resample, AudioBuffer, STANDARD_RATE_HZ};
pub use fft::Fft;
pub use frames::{frame_count, FrameConfig};
pub use functionals::{chunk_functionals, AcousticChunkMatrix, ChunkFeatures};
pub use lld::{extract_llds, Lld, LldExtractor, LldMatrix, F0_MAX_HZ, F0_MIN_HZ};
pub use registry::{FeatureCategory, FeatureRegistry, FeatureSetSplit, FeatureSpec, Functional};
