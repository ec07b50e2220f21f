//! Synthetic desk corpus and corpus manifests.
//!
//! The generator produces 8 kHz signals that mimic the frame-to-frame
//! behaviour of speech: voiced stretches (glottal pulses through a formant
//! resonator), unvoiced noise, near-silent pauses and amplitude envelopes,
//! plus stationary AR and nonlinear-AR test signals.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dsp::Signal;
use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 8000;

/// Environment variable naming the corpus root directory.
pub const CORPUS_ENV: &str = "NLAD_CORPUS";

/// Kinds of synthetic signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Stationary AR(2) with coefficients `[0.9, -0.2]`.
    Ar2,
    /// Segments of voiced, unvoiced and silent speech-like sound.
    SpeechLike,
    /// Speech-like signal through a memoryless soft saturation.
    SaturatedSpeech,
    /// Nonlinear autoregression with a sinusoidal map.
    NonlinearAr,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Ar2 => "ar2",
            SyntheticKind::SpeechLike => "speech",
            SyntheticKind::SaturatedSpeech => "saturated",
            SyntheticKind::NonlinearAr => "nlar",
        }
    }
}

struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream.to_le_bytes());
        key[16..24].copy_from_slice(b"corpus\0\0");
        Noise(ChaCha8Rng::from_seed(key))
    }

    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// All-pole resonator coefficients (`x[n] = sum a[i] x[n-1-i] + e[n]`) with
/// one conjugate pole pair per `(frequency, bandwidth)`.
fn resonator(formants: &[(f64, f64)]) -> Vec<f64> {
    // Multiply out prod (1 - 2 r cos(t) z^-1 + r^2 z^-2).
    let mut poly = vec![1.0];
    for &(f, bw) in formants {
        let r = (-PI * bw / SAMPLE_RATE as f64).exp();
        let t = 2.0 * PI * f / SAMPLE_RATE as f64;
        let sec = [1.0, -2.0 * r * t.cos(), r * r];
        let mut next = vec![0.0; poly.len() + 2];
        for (i, p) in poly.iter().enumerate() {
            for (j, s) in sec.iter().enumerate() {
                next[i + j] += p * s;
            }
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c).collect()
}

fn filter(a: &[f64], excitation: &[f64], state: &mut Vec<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(excitation.len());
    for &e in excitation {
        let mut y = e;
        for (i, ai) in a.iter().enumerate() {
            y += ai * state.get(state.len().wrapping_sub(1 + i)).copied().unwrap_or(0.0);
        }
        state.push(y);
        out.push(y);
    }
    if state.len() > 64 {
        state.drain(..state.len() - 64);
    }
    out
}

fn normalize_peak(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        let g = peak / m;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

fn speech_like(n: usize, noise: &mut Noise) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut state = Vec::new();
    let mut phase = 0.0f64;
    while out.len() < n {
        let seg_len = noise.range(300.0, 1400.0) as usize;
        let kind = noise.uniform();
        let formants = [
            (noise.range(300.0, 850.0), noise.range(60.0, 160.0)),
            (noise.range(900.0, 2300.0), noise.range(80.0, 200.0)),
            (noise.range(2300.0, 3200.0), noise.range(120.0, 260.0)),
            (noise.range(3200.0, 3800.0), noise.range(150.0, 300.0)),
        ];
        let a = resonator(&formants);
        let gain = noise.range(0.2, 1.0);
        let mut exc = vec![0.0; seg_len];
        if kind < 0.6 {
            // voiced: Rosenberg glottal-flow derivative with jitter and
            // aspiration noise
            let pitch = noise.range(40.0, 110.0);
            let drift = noise.range(-0.2, 0.2) / seg_len as f64;
            let open = noise.range(0.35, 0.5);
            let close = noise.range(0.1, 0.2);
            let mut prev_flow = 0.0;
            for (i, e) in exc.iter_mut().enumerate() {
                phase += 1.0 / (pitch * (1.0 + drift * i as f64));
                if phase >= 1.0 {
                    phase -= 1.0;
                }
                let flow = if phase < open {
                    0.5 - 0.5 * (PI * phase / open).cos()
                } else if phase < open + close {
                    (0.5 * PI * (phase - open) / close).cos()
                } else {
                    0.0
                };
                *e = (flow - prev_flow) * pitch * 0.1 + 0.03 * noise.gaussian();
                prev_flow = flow;
            }
        } else if kind < 0.85 {
            for e in exc.iter_mut() {
                *e = 0.3 * noise.gaussian();
            }
        } else {
            for e in exc.iter_mut() {
                *e = 0.002 * noise.gaussian();
            }
        }
        let mut seg = filter(&a, &exc, &mut state);
        // raised-cosine attack and release
        let ramp = (seg_len / 6).max(1);
        for i in 0..seg_len {
            let edge = i.min(seg_len - 1 - i);
            let env = if edge < ramp {
                0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            seg[i] *= gain * env;
        }
        out.extend(seg);
    }
    out.truncate(n);
    out
}

/// Generates one synthetic signal of `n` samples, peak-normalized to 0.9.
pub fn synthesize(kind: SyntheticKind, n: usize, seed: u64) -> Signal {
    let mut noise = Noise::new(seed, kind as u64);
    let mut x = match kind {
        SyntheticKind::Ar2 => {
            let mut x = vec![0.0; n];
            for i in 0..n {
                let x1 = if i >= 1 { x[i - 1] } else { 0.0 };
                let x2 = if i >= 2 { x[i - 2] } else { 0.0 };
                x[i] = 0.9 * x1 - 0.2 * x2 + noise.gaussian();
            }
            x
        }
        SyntheticKind::SpeechLike => speech_like(n, &mut noise),
        SyntheticKind::SaturatedSpeech => {
            let mut x = speech_like(n, &mut noise);
            normalize_peak(&mut x, 2.5);
            x.iter_mut().for_each(|v| *v = v.tanh());
            x
        }
        SyntheticKind::NonlinearAr => {
            let mut x = vec![0.0; n];
            for i in 0..n {
                let x1 = if i >= 1 { x[i - 1] } else { 0.0 };
                let x2 = if i >= 2 { x[i - 2] } else { 0.0 };
                x[i] = 0.95 * (PI * 0.6 * x1).sin() - 0.35 * x2 * x1.abs() - 0.2 * x2
                    + 0.15 * noise.gaussian();
            }
            x
        }
    };
    normalize_peak(&mut x, 0.9);
    Signal {
        samples: x,
        sample_rate: SAMPLE_RATE,
    }
}

/// A named corpus entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub signal: Signal,
}

/// `n_files` synthetic signals of `n_samples` each: mostly speech-like, with
/// one saturated and one nonlinear-AR signal in every group of five.
pub fn desk_corpus(n_files: usize, n_samples: usize, seed: u64) -> Vec<CorpusEntry> {
    (0..n_files)
        .map(|i| {
            let kind = match i % 5 {
                3 => SyntheticKind::SaturatedSpeech,
                4 => SyntheticKind::NonlinearAr,
                _ => SyntheticKind::SpeechLike,
            };
            let file_seed = seed.wrapping_add(i as u64);
            CorpusEntry {
                name: format!("{}-{i:02}", kind.name()),
                signal: synthesize(kind, n_samples, file_seed),
            }
        })
        .collect()
}

/// Reads a manifest: one WAV path per line, relative to the manifest's
/// directory (or to `root` when given). Blank lines and `#` comments are
/// skipped.
pub fn read_manifest(path: &Path, root: Option<&Path>) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    let base = match root {
        Some(r) => r.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_signals_are_normalized_and_deterministic() {
        for kind in [
            SyntheticKind::Ar2,
            SyntheticKind::SpeechLike,
            SyntheticKind::SaturatedSpeech,
            SyntheticKind::NonlinearAr,
        ] {
            let a = synthesize(kind, 2000, 3);
            assert_eq!(a, synthesize(kind, 2000, 3));
            assert!(a.is_normalized());
            assert!(a.samples.iter().all(|v| v.is_finite()));
            assert!(a.samples.iter().any(|v| v.abs() > 0.5));
        }
    }

    #[test]
    fn resonator_is_stable() {
        let a = resonator(&[(500.0, 80.0), (1500.0, 120.0)]);
        assert_eq!(a.len(), 4);
        let mut state = Vec::new();
        let mut imp = vec![0.0; 4000];
        imp[0] = 1.0;
        let y = filter(&a, &imp, &mut state);
        assert!(y[3900..].iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("corpus.txt");
        std::fs::write(&m, "# speakers\na.wav\n\n sub/b.wav \n").unwrap();
        let files = read_manifest(&m, None).unwrap();
        assert_eq!(files, vec![dir.path().join("a.wav"), dir.path().join("sub/b.wav")]);
    }
}
