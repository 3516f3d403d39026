use alloc::string::String;
use alloc::vec::Vec;

use super::frames::FrameConfig;
use super::lld::LldMatrix;
use super::registry::{FeatureRegistry, FeatureSpec, Functional};
use crate::error::{Error, Result};

/// Chunk-by-feature matrix of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkFeatures {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ChunkFeatures {
    pub fn n_chunks(&self) -> usize {
        self.rows.len()
    }

    /// Columns of `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::MissingFeature(n.clone()))
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect())
    }
}

/// Stack of per-recording chunk matrices sharing one feature order, the
/// `(samples, chunks, features)` tensor. Recordings may differ in length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AcousticChunkMatrix {
    feature_names: Vec<String>,
    samples: Vec<Vec<Vec<f64>>>,
}

impl AcousticChunkMatrix {
    pub fn new(feature_names: Vec<String>) -> Self {
        AcousticChunkMatrix { feature_names, samples: Vec::new() }
    }

    pub fn push(&mut self, chunks: ChunkFeatures) -> Result<()> {
        if chunks.feature_names != self.feature_names {
            return Err(Error::invalid("chunk matrix feature order differs"));
        }
        for row in &chunks.rows {
            if row.len() != self.feature_names.len() || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("chunk row has wrong width or non-finite values"));
            }
        }
        self.samples.push(chunks.rows);
        Ok(())
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// `(x, y, z)`: recordings, the longest chunk count, features.
    pub fn shape(&self) -> (usize, usize, usize) {
        let y = self.samples.iter().map(Vec::len).max().unwrap_or(0);
        (self.samples.len(), y, self.feature_names.len())
    }

    pub fn chunks_of(&self, sample: usize) -> &[Vec<f64>] {
        &self.samples[sample]
    }

    /// Every chunk as a row, tagged with its recording index.
    pub fn flatten(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.samples.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |r| (i, r.as_slice())))
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    libm::sqrt(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64)
}

fn slope(t: &[f64], v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let (mt, mv) = (mean(t), mean(v));
    let sxx: f64 = t.iter().map(|x| (x - mt) * (x - mt)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    t.iter().zip(v).map(|(x, y)| (x - mt) * (y - mv)).sum::<f64>() / sxx
}

fn functional(spec: &FeatureSpec, llds: &LldMatrix, frames: &[usize], chunk_s: f64) -> f64 {
    let rate = f64::from(llds.sample_rate_hz());
    let keep: Vec<usize> = frames
        .iter()
        .copied()
        .filter(|&f| !spec.voiced_only || llds.voiced()[f])
        .collect();
    let v: Vec<f64> = keep.iter().map(|&f| llds.get(f, spec.lld)).collect();
    match spec.functional {
        Functional::Mean => mean(&v),
        Functional::Std => std(&v),
        Functional::Range => {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if v.is_empty() { 0.0 } else { hi - lo }
        }
        Functional::DeltaMean => {
            let d: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            mean(&d)
        }
        Functional::Slope => {
            let t: Vec<f64> = keep.iter().map(|&f| llds.frame_starts()[f] as f64 / rate).collect();
            slope(&t, &v)
        }
        Functional::VoicedFraction => {
            if frames.is_empty() {
                0.0
            } else {
                frames.iter().filter(|&&f| llds.voiced()[f]).count() as f64 / frames.len() as f64
            }
        }
        Functional::PeakRate => {
            let m = mean(&v);
            let peaks = (1..v.len().saturating_sub(1))
                .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > m && v[i] > 1e-4)
                .count();
            peaks as f64 / chunk_s
        }
    }
}

/// Summarises descriptors over non-overlapping chunks of `cfg.chunk_s`
/// seconds. Frames belong to the chunk holding their first sample; the
/// partial trailing chunk is dropped.
pub fn chunk_functionals(
    llds: &LldMatrix,
    cfg: &FrameConfig,
    registry: &FeatureRegistry,
) -> Result<ChunkFeatures> {
    cfg.validate()?;
    let chunk = cfg.chunk_samples(llds.sample_rate_hz());
    let n_chunks = llds.n_samples() / chunk;
    if n_chunks == 0 {
        return Err(Error::RecordingTooShort(alloc::format!(
            "{:.3} s of audio is shorter than one {} s chunk",
            llds.n_samples() as f64 / f64::from(llds.sample_rate_hz()),
            cfg.chunk_s
        )));
    }
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_chunks];
    for (f, &start) in llds.frame_starts().iter().enumerate() {
        let c = start / chunk;
        if c < n_chunks {
            members[c].push(f);
        }
    }
    let rows = members
        .iter()
        .map(|frames| {
            registry
                .specs()
                .iter()
                .map(|s| {
                    let v = functional(s, llds, frames, f64::from(cfg.chunk_s));
                    if v.is_finite() { v } else { 0.0 }
                })
                .collect()
        })
        .collect();
    Ok(ChunkFeatures { feature_names: registry.names(), rows })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{extract_llds, AudioBuffer};

    fn tone(secs: f64) -> AudioBuffer {
        let n = (16_000.0 * secs) as usize;
        let s = (0..n)
            .map(|i| 0.5 * libm::sin(2.0 * core::f64::consts::PI * 200.0 * i as f64 / 16_000.0))
            .collect();
        AudioBuffer::new(s, 16_000).unwrap()
    }

    fn chunks(secs: f64) -> Result<ChunkFeatures> {
        let cfg = FrameConfig::default();
        let llds = extract_llds(&tone(secs), &cfg)?;
        chunk_functionals(&llds, &cfg, &FeatureRegistry::default())
    }

    #[test]
    fn chunk_counts() {
        assert_eq!(chunks(10.0).unwrap().n_chunks(), 2);
        assert_eq!(chunks(7.0).unwrap().n_chunks(), 1);
        assert!(matches!(chunks(4.9), Err(Error::RecordingTooShort(_))));
    }

    #[test]
    fn constant_tone_has_flat_energy() {
        let c = chunks(5.0).unwrap();
        let r = FeatureRegistry::default();
        let row = &c.rows[0];
        assert!(row[r.position("energy_std").unwrap()] < 1e-3);
        assert!((row[r.position("f0_mean").unwrap()] - 200.0).abs() < 5.0);
        assert_eq!(row[r.position("voiced_fraction").unwrap()], 1.0);
        assert!(row.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn helpers() {
        assert_eq!(std(&[1.0, 3.0]), 1.0);
        assert_eq!(slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), 2.0);
        assert_eq!(slope(&[1.0, 1.0], &[0.0, 5.0]), 0.0);
        assert_eq!(mean(&[]), 0.0);
    }

    #[test]
    fn matrix_shape_and_select() {
        let a = chunks(10.0).unwrap();
        let b = chunks(5.0).unwrap();
        let mut m = AcousticChunkMatrix::new(a.feature_names.clone());
        m.push(a.clone()).unwrap();
        m.push(b).unwrap();
        assert_eq!(m.shape(), (2, 2, 69));
        assert_eq!(m.flatten().count(), 3);
        let cols = a.select(&[String::from("f0_mean"), String::from("zcr_mean")]).unwrap();
        assert_eq!(cols[0].len(), 2);
        assert!(matches!(a.select(&[String::from("nope")]), Err(Error::MissingFeature(_))));
        let mut bad = a;
        bad.feature_names.pop();
        assert!(m.push(bad).is_err());
    }
}
