use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Framing and chunking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameConfig {
    pub window_ms: u32,
    pub hop_ms: u32,
    pub chunk_s: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { window_ms: 25, hop_ms: 10, chunk_s: 5 }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_ms == 0 || self.hop_ms == 0 || self.chunk_s == 0 {
            return Err(Error::invalid("frame parameters must be positive"));
        }
        if self.hop_ms > self.window_ms {
            return Err(Error::invalid("hop must not exceed window"));
        }
        if (self.chunk_s * 1000) % self.hop_ms != 0 {
            return Err(Error::invalid("chunk length must be a whole number of hops"));
        }
        Ok(())
    }

    pub fn window_samples(&self, rate: u32) -> usize {
        (u64::from(self.window_ms) * u64::from(rate) / 1000) as usize
    }

    pub fn hop_samples(&self, rate: u32) -> usize {
        (u64::from(self.hop_ms) * u64::from(rate) / 1000) as usize
    }

    pub fn chunk_samples(&self, rate: u32) -> usize {
        (u64::from(self.chunk_s) * u64::from(rate)) as usize
    }
}

/// Number of full windows: 0 when `n_samples < window`, otherwise
/// `(n_samples - window) / hop + 1`.
pub fn frame_count(n_samples: usize, window: usize, hop: usize) -> usize {
    if window == 0 || hop == 0 || n_samples < window {
        0
    } else {
        (n_samples - window) / hop + 1
    }
}
