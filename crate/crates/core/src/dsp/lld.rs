use alloc::vec::Vec;

use super::audio::AudioBuffer;
use super::fft::Fft;
use super::frames::{frame_count, FrameConfig};
use crate::error::{Error, Result};

/// Lowest pitch searched.
pub const F0_MIN_HZ: f64 = 50.0;
/// Highest pitch searched. Wide enough for a 440 Hz reference tone.
pub const F0_MAX_HZ: f64 = 500.0;

const VOICING_THRESHOLD: f64 = 0.5;
const SILENCE_RMS: f64 = 1e-4;
const N_MEL: usize = 26;
const N_MFCC: usize = 14;
const ROLLOFF: f64 = 0.85;
const LOG_FLOOR: f64 = 1e-10;

/// Per-frame low-level descriptors, in matrix column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lld {
    F0,
    Energy,
    Zcr,
    Jitter,
    Shimmer,
    Hnr,
    SpectralCentroid,
    SpectralBandwidth,
    SpectralRolloff,
    SpectralFlux,
    Mfcc1,
    Mfcc2,
    Mfcc3,
    Mfcc4,
    Mfcc5,
    Mfcc6,
    Mfcc7,
    Mfcc8,
    Mfcc9,
    Mfcc10,
    Mfcc11,
    Mfcc12,
    Mfcc13,
    Mfcc14,
}

impl Lld {
    pub const COUNT: usize = 24;

    pub const ALL: [Lld; Lld::COUNT] = [
        Lld::F0,
        Lld::Energy,
        Lld::Zcr,
        Lld::Jitter,
        Lld::Shimmer,
        Lld::Hnr,
        Lld::SpectralCentroid,
        Lld::SpectralBandwidth,
        Lld::SpectralRolloff,
        Lld::SpectralFlux,
        Lld::Mfcc1,
        Lld::Mfcc2,
        Lld::Mfcc3,
        Lld::Mfcc4,
        Lld::Mfcc5,
        Lld::Mfcc6,
        Lld::Mfcc7,
        Lld::Mfcc8,
        Lld::Mfcc9,
        Lld::Mfcc10,
        Lld::Mfcc11,
        Lld::Mfcc12,
        Lld::Mfcc13,
        Lld::Mfcc14,
    ];

    pub fn name(self) -> &'static str {
        const NAMES: [&str; Lld::COUNT] = [
            "f0", "energy", "zcr", "jitter", "shimmer", "hnr", "spectral_centroid",
            "spectral_bandwidth", "spectral_rolloff", "spectral_flux", "mfcc1", "mfcc2", "mfcc3",
            "mfcc4", "mfcc5", "mfcc6", "mfcc7", "mfcc8", "mfcc9", "mfcc10", "mfcc11", "mfcc12",
            "mfcc13", "mfcc14",
        ];
        NAMES[self as usize]
    }

    pub fn parse(s: &str) -> Option<Lld> {
        Lld::ALL.iter().copied().find(|l| l.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn mfcc(i: usize) -> Lld {
        Lld::ALL[Lld::Mfcc1.index() + i]
    }
}

/// Frame-by-descriptor matrix for one stretch of audio.
#[derive(Debug, Clone, PartialEq)]
pub struct LldMatrix {
    data: Vec<[f64; Lld::COUNT]>,
    voiced: Vec<bool>,
    frame_starts: Vec<usize>,
    n_samples: usize,
    sample_rate_hz: u32,
}

impl LldMatrix {
    pub fn n_frames(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn frame(&self, i: usize) -> &[f64; Lld::COUNT] {
        &self.data[i]
    }

    pub fn get(&self, frame: usize, lld: Lld) -> f64 {
        self.data[frame][lld.index()]
    }

    pub fn column(&self, lld: Lld) -> Vec<f64> {
        self.data.iter().map(|r| r[lld.index()]).collect()
    }

    pub fn voiced(&self) -> &[bool] {
        &self.voiced
    }

    pub fn frame_starts(&self) -> &[usize] {
        &self.frame_starts
    }

    pub fn rows(&self) -> &[[f64; Lld::COUNT]] {
        &self.data
    }
}

/// Reusable analysis state for one sample rate and frame configuration.
#[derive(Debug, Clone)]
pub struct LldExtractor {
    rate: u32,
    window: usize,
    hop: usize,
    hann: Vec<f64>,
    fft: Fft,
    bin_hz: Vec<f64>,
    mel: Vec<Vec<(usize, f64)>>,
    dct: Vec<[f64; N_MEL]>,
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * libm::log10(1.0 + f / 700.0)
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (libm::pow(10.0, m / 2595.0) - 1.0)
}

struct PitchEstimate {
    f0: f64,
    strength: f64,
}

impl LldExtractor {
    pub fn new(rate: u32, cfg: &FrameConfig) -> Result<Self> {
        cfg.validate()?;
        if rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        let window = cfg.window_samples(rate);
        let hop = cfg.hop_samples(rate);
        let min_lag = libm::floor(f64::from(rate) / F0_MAX_HZ) as usize;
        if window < 4 || hop == 0 || min_lag < 2 {
            return Err(Error::invalid(alloc::format!("sample rate {rate} Hz too low to analyse")));
        }
        let n_fft = window.next_power_of_two();
        let hann = (0..window)
            .map(|i| 0.5 - 0.5 * libm::cos(2.0 * core::f64::consts::PI * i as f64 / (window - 1) as f64))
            .collect();
        let n_bins = n_fft / 2 + 1;
        let bin_hz: Vec<f64> = (0..n_bins).map(|k| k as f64 * f64::from(rate) / n_fft as f64).collect();

        let nyquist = f64::from(rate) / 2.0;
        let mel_max = hz_to_mel(nyquist);
        let edges: Vec<f64> =
            (0..N_MEL + 2).map(|i| mel_to_hz(mel_max * i as f64 / (N_MEL + 1) as f64)).collect();
        let mel = (0..N_MEL)
            .map(|m| {
                let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                bin_hz
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &f)| {
                        let w = if f > lo && f <= c {
                            (f - lo) / (c - lo)
                        } else if f > c && f < hi {
                            (hi - f) / (hi - c)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w))
                    })
                    .collect()
            })
            .collect();
        let scale = libm::sqrt(2.0 / N_MEL as f64);
        let dct = (1..=N_MFCC)
            .map(|j| {
                let mut row = [0.0; N_MEL];
                for (m, r) in row.iter_mut().enumerate() {
                    *r = scale * libm::cos(core::f64::consts::PI * j as f64 * (m as f64 + 0.5) / N_MEL as f64);
                }
                row
            })
            .collect();
        Ok(LldExtractor { rate, window, hop, hann, fft: Fft::new(n_fft)?, bin_hz, mel, dct })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.rate
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Normalized cross-correlation pitch tracker. Picks the shortest lag
    /// whose local peak reaches 90% of the best peak, refined by parabolic
    /// interpolation.
    fn pitch(&self, x: &[f64]) -> PitchEstimate {
        let n = x.len();
        let min_lag = libm::floor(f64::from(self.rate) / F0_MAX_HZ) as usize;
        let max_lag = (libm::ceil(f64::from(self.rate) / F0_MIN_HZ) as usize).min(n.saturating_sub(3));
        let unvoiced = PitchEstimate { f0: 0.0, strength: 0.0 };
        if max_lag <= min_lag {
            return unvoiced;
        }
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for &v in x {
            let last = *prefix.last().unwrap_or(&0.0);
            prefix.push(last + v * v);
        }
        let lo = min_lag - 1;
        let hi = max_lag + 1;
        let mut r = alloc::vec![0.0; hi + 1];
        for (tau, slot) in r.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let m = n - tau;
            let mut dot = 0.0;
            for i in 0..m {
                dot += x[i] * x[i + tau];
            }
            let e0 = prefix[m];
            let e1 = prefix[n] - prefix[tau];
            let den = libm::sqrt(e0 * e1);
            *slot = if den > 0.0 { dot / den } else { 0.0 };
        }
        let peaks: Vec<usize> =
            (min_lag..=max_lag).filter(|&t| r[t] > r[t - 1] && r[t] >= r[t + 1]).collect();
        let Some(best) = peaks.iter().map(|&t| r[t]).reduce(f64::max) else {
            return unvoiced;
        };
        let Some(&tau) = peaks.iter().find(|&&t| r[t] >= 0.9 * best) else {
            return unvoiced;
        };
        let (a, b, c) = (r[tau - 1], r[tau], r[tau + 1]);
        let den = a - 2.0 * b + c;
        let delta = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
        let strength = (b - 0.25 * (a - c) * delta).clamp(0.0, 1.0);
        if strength < VOICING_THRESHOLD {
            return PitchEstimate { f0: 0.0, strength };
        }
        PitchEstimate { f0: f64::from(self.rate) / (tau as f64 + delta), strength }
    }

    /// Extracts descriptors for every full frame of `samples`.
    pub fn extract(&self, samples: &[f64]) -> Result<LldMatrix> {
        let n_frames = frame_count(samples.len(), self.window, self.hop);
        if n_frames == 0 {
            return Err(Error::RecordingTooShort(alloc::format!(
                "{} samples is shorter than one {}-sample window",
                samples.len(),
                self.window
            )));
        }
        let mut data = Vec::with_capacity(n_frames);
        let mut voiced = Vec::with_capacity(n_frames);
        let mut frame_starts = Vec::with_capacity(n_frames);
        let mut periods: Vec<f64> = Vec::with_capacity(n_frames);
        let mut peaks: Vec<f64> = Vec::with_capacity(n_frames);
        let mut prev_norm: Option<Vec<f64>> = None;
        let (mut re, mut im) = (Vec::new(), Vec::new());
        let mut windowed = alloc::vec![0.0; self.window];

        for f in 0..n_frames {
            let start = f * self.hop;
            let x = &samples[start..start + self.window];
            let mut row = [0.0; Lld::COUNT];

            let energy = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64);
            row[Lld::Energy.index()] = energy;
            let crossings = x.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count();
            row[Lld::Zcr.index()] = crossings as f64 / (x.len() - 1) as f64;

            let pitch = if energy > SILENCE_RMS { self.pitch(x) } else { PitchEstimate { f0: 0.0, strength: 0.0 } };
            let is_voiced = pitch.f0 > 0.0;
            if is_voiced {
                row[Lld::F0.index()] = pitch.f0;
                let r = pitch.strength.clamp(1e-6, 1.0 - 1e-6);
                row[Lld::Hnr.index()] = 10.0 * libm::log10(r / (1.0 - r));
            }
            periods.push(if is_voiced { 1.0 / pitch.f0 } else { 0.0 });
            peaks.push(x.iter().fold(0.0f64, |m, v| m.max(v.abs())));

            for (w, (s, h)) in windowed.iter_mut().zip(x.iter().zip(&self.hann)) {
                *w = s * h;
            }
            let power = self.fft.power_spectrum(&windowed, &mut re, &mut im);
            let mag: Vec<f64> = power.iter().map(|p| libm::sqrt(*p)).collect();
            let total: f64 = mag.iter().sum();
            if total > 0.0 {
                let centroid = mag.iter().zip(&self.bin_hz).map(|(m, f)| m * f).sum::<f64>() / total;
                let spread = mag
                    .iter()
                    .zip(&self.bin_hz)
                    .map(|(m, f)| m * (f - centroid) * (f - centroid))
                    .sum::<f64>()
                    / total;
                row[Lld::SpectralCentroid.index()] = centroid;
                row[Lld::SpectralBandwidth.index()] = libm::sqrt(spread);
                let mut acc = 0.0;
                for (m, f) in mag.iter().zip(&self.bin_hz) {
                    acc += m;
                    if acc >= ROLLOFF * total {
                        row[Lld::SpectralRolloff.index()] = *f;
                        break;
                    }
                }
            }
            let norm: Vec<f64> =
                if total > 0.0 { mag.iter().map(|m| m / total).collect() } else { alloc::vec![0.0; mag.len()] };
            if let Some(prev) = &prev_norm {
                let d: f64 = norm.iter().zip(prev).map(|(a, b)| (a - b) * (a - b)).sum();
                row[Lld::SpectralFlux.index()] = libm::sqrt(d);
            }
            prev_norm = Some(norm);

            // Floor relative to the frame power, so gain only moves c0.
            let floor = LOG_FLOOR * power.iter().sum::<f64>() + f64::MIN_POSITIVE;
            let mut log_mel = [0.0; N_MEL];
            for (out, filt) in log_mel.iter_mut().zip(&self.mel) {
                let e: f64 = filt.iter().map(|&(k, w)| power[k] * w).sum();
                *out = libm::log(e + floor);
            }
            for (j, basis) in self.dct.iter().enumerate() {
                row[Lld::mfcc(j).index()] = basis.iter().zip(&log_mel).map(|(b, l)| b * l).sum();
            }

            data.push(row);
            voiced.push(is_voiced);
            frame_starts.push(start);
        }

        for f in 1..n_frames {
            if voiced[f] && voiced[f - 1] {
                let (t0, t1) = (periods[f - 1], periods[f]);
                data[f][Lld::Jitter.index()] = (t1 - t0).abs() / (0.5 * (t0 + t1));
                let (a0, a1) = (peaks[f - 1], peaks[f]);
                if a0 + a1 > 0.0 {
                    data[f][Lld::Shimmer.index()] = (a1 - a0).abs() / (0.5 * (a0 + a1));
                }
            }
        }

        Ok(LldMatrix { data, voiced, frame_starts, n_samples: samples.len(), sample_rate_hz: self.rate })
    }
}

/// Extracts descriptors at the buffer's own sample rate.
pub fn extract_llds(audio: &AudioBuffer, cfg: &FrameConfig) -> Result<LldMatrix> {
    LldExtractor::new(audio.sample_rate_hz(), cfg)?.extract(audio.samples())
}
