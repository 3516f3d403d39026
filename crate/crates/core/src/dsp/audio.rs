use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Rate every analysis runs at.
pub const STANDARD_RATE_HZ: u32 = 16_000;

/// Mono PCM with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !(s.is_finite() && s.abs() <= 1.0)) {
            return Err(Error::invalid(alloc::format!("sample {i} outside [-1, 1]")));
        }
        Ok(AudioBuffer { samples, sample_rate_hz })
    }

    /// Scales 16-bit PCM by 1/32768.
    pub fn from_pcm_i16(pcm: &[i16], sample_rate_hz: u32) -> Result<Self> {
        AudioBuffer::new(pcm.iter().map(|&s| f64::from(s) / 32768.0).collect(), sample_rate_hz)
    }

    /// Inverse of [`AudioBuffer::from_pcm_i16`], rounding to nearest.
    pub fn to_pcm_i16(&self) -> Vec<i16> {
        self.samples
            .iter()
            .map(|&s| libm::round(s * 32768.0).clamp(-32768.0, 32767.0) as i16)
            .collect()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn slice(&self, start: usize, end: usize) -> AudioBuffer {
        AudioBuffer { samples: self.samples[start..end].to_vec(), sample_rate_hz: self.sample_rate_hz }
    }

    pub fn append(&mut self, other: &AudioBuffer) -> Result<()> {
        if other.sample_rate_hz != self.sample_rate_hz {
            return Err(Error::invalid(alloc::format!(
                "cannot append {} Hz audio to a {} Hz buffer",
                other.sample_rate_hz,
                self.sample_rate_hz
            )));
        }
        self.samples.extend_from_slice(&other.samples);
        Ok(())
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Linear-interpolation resampling. Output length is
/// `round(len * target / source)`.
pub fn resample(audio: &AudioBuffer, target_hz: u32) -> Result<AudioBuffer> {
    if target_hz == 0 {
        return Err(Error::invalid("target sample rate must be positive"));
    }
    if audio.is_empty() {
        return Err(Error::invalid("cannot resample empty audio"));
    }
    let src = u64::from(audio.sample_rate_hz);
    let dst = u64::from(target_hz);
    if src == dst {
        return Ok(audio.clone());
    }
    let x = audio.samples();
    let n_in = x.len() as u64;
    let n_out = (n_in * dst + src / 2) / src;
    let last = x.len() - 1;
    let mut out = Vec::with_capacity(n_out as usize);
    for i in 0..n_out {
        // Exact rational position i * src / dst in input samples.
        let num = i * src;
        let idx = (num / dst) as usize;
        let frac = (num % dst) as f64 / dst as f64;
        let v = if idx >= last {
            x[last]
        } else {
            x[idx] + (x[idx + 1] - x[idx]) * frac
        };
        out.push(v.clamp(-1.0, 1.0));
    }
    AudioBuffer::new(out, target_hz)
}
