use alloc::vec::Vec;

use super::audio::{resample, AudioBuffer, STANDARD_RATE_HZ};
use super::frames::FrameConfig;
use super::functionals::{chunk_functionals, ChunkFeatures};
use super::lld::LldExtractor;
use super::registry::FeatureRegistry;
use crate::error::{Error, Result};

/// Recording to chunk-feature pipeline. Each chunk is resampled and
/// analysed independently, so feeding a recording block by block gives the
/// same rows as analysing it whole.
#[derive(Debug, Clone)]
pub struct AcousticPipeline {
    cfg: FrameConfig,
    registry: FeatureRegistry,
    extractor: LldExtractor,
}

impl Default for AcousticPipeline {
    fn default() -> Self {
        AcousticPipeline::new(FrameConfig::default(), FeatureRegistry::default())
            .expect("default acoustic configuration is valid")
    }
}

impl AcousticPipeline {
    pub fn new(cfg: FrameConfig, registry: FeatureRegistry) -> Result<Self> {
        let extractor = LldExtractor::new(STANDARD_RATE_HZ, &cfg)?;
        Ok(AcousticPipeline { cfg, registry, extractor })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn registry(&self) -> &FeatureRegistry {
        &self.registry
    }

    /// Samples per chunk at `rate`.
    pub fn chunk_samples(&self, rate: u32) -> usize {
        self.cfg.chunk_samples(rate)
    }

    /// Feature row of one chunk-length block at any sample rate.
    pub fn block_features(&self, block: &AudioBuffer) -> Result<Vec<f64>> {
        if block.len() != self.chunk_samples(block.sample_rate_hz()) {
            return Err(Error::invalid(alloc::format!(
                "block has {} samples, expected {}",
                block.len(),
                self.chunk_samples(block.sample_rate_hz())
            )));
        }
        let audio = resample(block, STANDARD_RATE_HZ)?;
        let llds = self.extractor.extract(audio.samples())?;
        let mut c = chunk_functionals(&llds, &self.cfg, &self.registry)?;
        c.rows.pop().ok_or_else(|| Error::RecordingTooShort("empty block".into()))
    }

    /// Feature rows of every complete chunk of a recording.
    pub fn recording_features(&self, audio: &AudioBuffer) -> Result<ChunkFeatures> {
        let chunk = self.chunk_samples(audio.sample_rate_hz());
        let n = audio.len() / chunk;
        if n == 0 {
            return Err(Error::RecordingTooShort(alloc::format!(
                "{:.3} s of audio is shorter than one {} s chunk",
                audio.duration_s(),
                self.cfg.chunk_s
            )));
        }
        let rows = (0..n)
            .map(|i| self.block_features(&audio.slice(i * chunk, (i + 1) * chunk)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChunkFeatures { feature_names: self.registry.names(), rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_tone(rate: u32, secs: f64) -> AudioBuffer {
        let n = (f64::from(rate) * secs) as usize;
        let s = (0..n)
            .map(|i| {
                let t = i as f64 / f64::from(rate);
                0.4 * libm::sin(2.0 * core::f64::consts::PI * (150.0 + 20.0 * libm::sin(t)) * t)
                    + 0.05 * libm::sin(i as f64 * 1.7)
            })
            .collect();
        AudioBuffer::new(s, rate).unwrap()
    }

    #[test]
    fn chunk_counts_follow_floor_rule() {
        let p = AcousticPipeline::default();
        assert_eq!(p.recording_features(&noise_tone(16_000, 25.0)).unwrap().n_chunks(), 5);
        assert_eq!(p.recording_features(&noise_tone(16_000, 23.0)).unwrap().n_chunks(), 4);
        assert_eq!(p.recording_features(&noise_tone(8_000, 11.0)).unwrap().n_chunks(), 2);
    }

    #[test]
    fn blockwise_equals_whole() {
        let p = AcousticPipeline::default();
        let a = noise_tone(16_000, 10.0);
        let whole = p.recording_features(&a).unwrap();
        let second = p.block_features(&a.slice(80_000, 160_000)).unwrap();
        assert_eq!(whole.rows[1], second);
    }

    #[test]
    fn deterministic() {
        let p = AcousticPipeline::default();
        let a = noise_tone(16_000, 5.0);
        let x = p.recording_features(&a).unwrap();
        let y = p.recording_features(&a).unwrap();
        let bits = |c: &ChunkFeatures| c.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&x), bits(&y));
    }

    #[test]
    fn block_length_checked() {
        let p = AcousticPipeline::default();
        assert!(p.block_features(&noise_tone(16_000, 1.0)).is_err());
    }
}
