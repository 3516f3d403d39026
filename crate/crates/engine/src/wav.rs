//! 16-bit PCM WAV input and output.

use std::path::Path;

use anyhow::{bail, Context, Result};
use cogspeech_core::dsp::AudioBuffer;

/// Reads a 16-bit integer PCM WAV. Multi-channel files keep the first
/// channel.
pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let mut reader =
        hound::WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        bail!(
            "{}: expected 16-bit integer PCM, found {} bit {:?}",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        );
    }
    let channels = usize::from(spec.channels.max(1));
    let mut pcm = Vec::with_capacity(reader.len() as usize / channels);
    for (i, s) in reader.samples::<i16>().enumerate() {
        let s = s.with_context(|| format!("decoding {}", path.display()))?;
        if i % channels == 0 {
            pcm.push(s);
        }
    }
    AudioBuffer::from_pcm_i16(&pcm, spec.sample_rate).with_context(|| path.display().to_string())
}

/// Writes mono 16-bit PCM.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).with_context(|| format!("creating {}", path.display()))?;
    for s in audio.to_pcm_i16() {
        w.write_sample(s)?;
    }
    w.finalize()?;
    Ok(())
}

/// Little-endian PCM bytes, the wire representation of audio chunks.
pub fn pcm_to_le_bytes(pcm: &[i16]) -> Vec<u8> {
    pcm.iter().flat_map(|s| s.to_le_bytes()).collect()
}

pub fn pcm_from_le_bytes(bytes: &[u8]) -> Option<Vec<i16>> {
    if bytes.len() % 2 != 0 {
        return None;
    }
    Some(bytes.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless_on_pcm() {
        let dir = tempfile::tempdir().unwrap();
        let pcm: Vec<i16> = (0..1600).map(|i| ((i * 37) % 65536 - 32768) as i16).collect();
        let audio = AudioBuffer::from_pcm_i16(&pcm, 16000).unwrap();
        let path = dir.path().join("a.wav");
        write_wav(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.to_pcm_i16(), pcm);
        assert_eq!(back.sample_rate_hz(), 16000);
    }

    #[test]
    fn stereo_keeps_first_channel_and_float_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = hound::WavSpec { channels: 2, sample_rate: 8000, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for i in 0..10i16 {
            w.write_sample(i).unwrap();
            w.write_sample(-1000).unwrap();
        }
        w.finalize().unwrap();
        assert_eq!(read_wav(&path).unwrap().to_pcm_i16(), (0..10).collect::<Vec<i16>>());

        let fpath = dir.path().join("f.wav");
        let spec = hound::WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
        let mut w = hound::WavWriter::create(&fpath, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert!(read_wav(&fpath).is_err());
        assert!(read_wav(&dir.path().join("missing.wav")).is_err());
    }

    #[test]
    fn le_bytes() {
        let pcm = [1i16, -2, i16::MAX, i16::MIN];
        assert_eq!(pcm_from_le_bytes(&pcm_to_le_bytes(&pcm)).unwrap(), pcm);
        assert_eq!(pcm_from_le_bytes(&[1, 2, 3]), None);
    }
}
