//! 16-bit PCM mono WAV I/O.
//!
//! Samples are scaled by `1/32768` on read. On write they are scaled by
//! `32768`, rounded, and clamped symmetrically to `[-32767, 32767]`.

use std::path::Path;

use thiserror::Error;

use crate::dsp::Signal;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: expected 16-bit integer mono PCM, found {channels} channel(s), {bits}-bit {format:?}")]
    Unsupported {
        path: String,
        channels: u16,
        bits: u16,
        format: hound::SampleFormat,
    },
}

pub fn read_wav(path: &Path) -> Result<Signal, WavError> {
    let p = path.display().to_string();
    let reader = hound::WavReader::open(path).map_err(|source| WavError::Io {
        path: p.clone(),
        source,
    })?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(WavError::Unsupported {
            path: p,
            channels: spec.channels,
            bits: spec.bits_per_sample,
            format: spec.sample_format,
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| WavError::Io { path: p, source })?;
    Ok(Signal {
        samples,
        sample_rate: spec.sample_rate,
    })
}

/// Nearest 16-bit PCM value of a normalized sample.
pub fn to_pcm16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32767.0, 32767.0) as i16
}

/// Round-trips a signal through 16-bit PCM, as written by [`write_wav`].
pub fn pcm16_roundtrip(samples: &[f64]) -> Vec<f64> {
    samples.iter().map(|x| to_pcm16(*x) as f64 / 32768.0).collect()
}

pub fn write_wav(path: &Path, signal: &Signal) -> Result<(), WavError> {
    let p = path.display().to_string();
    let io = |source| WavError::Io {
        path: p.clone(),
        source,
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(io)?;
    for x in &signal.samples {
        w.write_sample(to_pcm16(*x)).map_err(io)?;
    }
    w.finalize().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm_clamp_is_symmetric() {
        assert_eq!(to_pcm16(1.0), 32767);
        assert_eq!(to_pcm16(-1.0), -32767);
        assert_eq!(to_pcm16(-2.0), -32767);
        assert_eq!(to_pcm16(0.5), 16384);
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let s = Signal::new(vec![0.0, 0.25, -0.5, 0.999, -1.0], 8000).unwrap();
        write_wav(&path, &s).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate, 8000);
        assert_eq!(back.samples, pcm16_roundtrip(&s.samples));
    }

    #[test]
    fn rejects_stereo() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&path), Err(WavError::Unsupported { .. })));
    }
}
