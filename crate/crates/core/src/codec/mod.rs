//! The ADPCM loop.
//!
//! Per sample: `x^ = predict(history)`, `c = Q(x - x^)`,
//! `x~ = x^ + Q^-1(c)`, push `x~` into the history, adapt the quantizer
//! from `c`. The predictor prediction is clamped to `[-1, 1]`.
//!
//! Per frame `k` (backward adaptation):
//!
//! * frame 0 uses the zero predictor;
//! * otherwise the predictor is computed from reconstructed frame `k-1`
//!   (LPC: autocorrelation + Levinson-Durbin over the whole frame; MLP: the
//!   190 in-frame training pairs, initializations seeded by `(seed, k, i)`);
//! * in validation mode frame `k >= 2` trains on frame `k-2` and
//!   early-stops against frame `k-1`; frame 1 trains on frame 0 without
//!   validation.
//!
//! A frame with zero energy, or one too short to yield training data,
//! produces the zero predictor for the next frame. The history carries over
//! frame boundaries; training pairs never do.
//!
//! The decoder runs the same engine on the transmitted codes, so its output
//! is bit-identical to the encoder's reconstruction.

mod bitstream;
mod config;

pub use bitstream::{body_len, pack_codes, unpack_codes, Bitstream, MAGIC};
pub use config::{Adaptation, CodecConfig, PredictorConfig, DEFAULT_FRAME_LEN};

use crate::dsp::{autocorrelation, levinson_durbin, predict_from_tail, segsnr, SegSnrReport, Signal};
use crate::error::{DecodeError, Error, Result};
use crate::quantizer::{Code, QuantizerState};
use crate::training::{make_dataset, multi_start, TrainedPredictor};

/// Version of the bitstream layout and of every format constant it relies on
/// (multiplier tables, weight layout, initialization stream).
pub const FORMAT_VERSION: u16 = 1;

/// Predictor in force for one frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Zero,
    Lpc(Vec<f64>),
    Mlp(TrainedPredictor),
}

impl Predictor {
    fn predict(&self, history: &[f64]) -> f64 {
        let raw = match self {
            Predictor::Zero => 0.0,
            Predictor::Lpc(a) => predict_from_tail(a, history),
            Predictor::Mlp(net) => {
                net.predict(&history[history.len() - crate::mlp::N_INPUTS..])
            }
        };
        raw.clamp(-1.0, 1.0)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Predictor::Zero => "zero",
            Predictor::Lpc(_) => "lpc",
            Predictor::Mlp(p) if p.is_committee() => "committee",
            Predictor::Mlp(_) => "mlp",
        }
    }
}

/// What happened at one frame boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInfo {
    pub index: usize,
    pub predictor: &'static str,
    /// The source frame had no energy (or no usable data).
    pub degenerate: bool,
    /// Every MLP start diverged; the zero predictor was used.
    pub fallback: bool,
    /// LPC recursion stopped below the requested order.
    pub lpc_truncated: bool,
    /// `gamma_eff` traces of every start (Bayesian regularization only).
    pub gamma_eff: Vec<Vec<f64>>,
    /// Training mse of each start.
    pub start_mse: Vec<f64>,
}

impl FrameInfo {
    fn new(index: usize) -> Self {
        Self {
            index,
            predictor: "zero",
            degenerate: false,
            fallback: false,
            lpc_truncated: false,
            gamma_eff: Vec::new(),
            start_mse: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeOutput {
    pub bitstream: Bitstream,
    /// The encoder's own reconstruction; the decoder reproduces it exactly.
    pub reconstruction: Signal,
    pub report: SegSnrReport,
    pub frames: Vec<FrameInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub reconstruction: Signal,
    pub report: SegSnrReport,
    pub frames: Vec<FrameInfo>,
}

/// Computes the predictor of frame `k`.
///
/// `recon` holds every reconstructed sample before frame `k`; `current`
/// holds the original samples of frame `k` (forward mode only).
fn frame_predictor(cfg: &CodecConfig, k: usize, recon: &[f64], current: &[f64]) -> Result<(Predictor, FrameInfo)> {
    let mut info = FrameInfo::new(k);
    let l = cfg.frame_len;
    let frame = |j: usize| &recon[j * l..(j + 1) * l];
    let (train_frame, val_frame): (&[f64], Option<&[f64]>) = match cfg.adaptation {
        Adaptation::ForwardUnquantized => (current, None),
        Adaptation::Backward if k == 0 => return Ok((Predictor::Zero, info)),
        Adaptation::Backward if cfg.validation_mode() && k >= 2 => (frame(k - 2), Some(frame(k - 1))),
        Adaptation::Backward => (frame(k - 1), None),
    };

    if train_frame.len() <= cfg.predictor.order() || train_frame.iter().all(|x| *x == 0.0) {
        info.degenerate = true;
        return Ok((Predictor::Zero, info));
    }

    let predictor = match &cfg.predictor {
        PredictorConfig::Lpc { order } => {
            let acf = autocorrelation(train_frame, *order)?;
            match levinson_durbin(&acf, *order) {
                Ok(c) => {
                    info.lpc_truncated = c.is_truncated();
                    Predictor::Lpc(c.a)
                }
                Err(Error::DegenerateFrame(_)) => {
                    info.degenerate = true;
                    Predictor::Zero
                }
                Err(e) => return Err(e),
            }
        }
        PredictorConfig::Mlp(train_cfg) => {
            let data = make_dataset(train_frame)?;
            let val = match val_frame {
                Some(v) => Some(make_dataset(v)?),
                None => None,
            };
            let net = multi_start(&data, val.as_deref(), train_cfg, cfg.rng_seed, k as u64)?;
            info.fallback = net.fallback;
            info.gamma_eff = net.starts.iter().map(|s| s.gamma_eff_trace.clone()).collect();
            info.start_mse = net.starts.iter().map(|s| s.train_mse).collect();
            if net.fallback {
                Predictor::Zero
            } else {
                Predictor::Mlp(net)
            }
        }
    };
    info.predictor = predictor.kind();
    Ok((predictor, info))
}

/// Shared encoder/decoder state machine.
struct Engine<'c> {
    cfg: &'c CodecConfig,
    quantizer: QuantizerState,
    /// `pad` zeros followed by the reconstruction so far.
    recon: Vec<f64>,
    pad: usize,
    predictor: Predictor,
    frames: Vec<FrameInfo>,
}

impl<'c> Engine<'c> {
    fn new(cfg: &'c CodecConfig, n_samples: usize) -> Result<Self> {
        cfg.validate()?;
        let pad = cfg.predictor.order();
        let mut recon = Vec::with_capacity(pad + n_samples);
        recon.resize(pad, 0.0);
        Ok(Self {
            cfg,
            quantizer: QuantizerState::from_params(cfg.quantizer.clone())?,
            recon,
            pad,
            predictor: Predictor::Zero,
            frames: Vec::new(),
        })
    }

    fn position(&self) -> usize {
        self.recon.len() - self.pad
    }

    /// Called before every sample; switches predictors at frame starts.
    fn begin_sample(&mut self, original: Option<&[f64]>) -> Result<()> {
        let n = self.position();
        let l = self.cfg.frame_len;
        if n % l == 0 {
            let k = n / l;
            let current = match original {
                Some(x) => &x[n..(n + l).min(x.len())],
                None => &[][..],
            };
            let (p, info) = frame_predictor(self.cfg, k, &self.recon[self.pad..], current)?;
            self.predictor = p;
            self.frames.push(info);
            if self.cfg.reset_quantizer_per_frame {
                self.quantizer.reset();
            }
        }
        Ok(())
    }

    fn prediction(&self) -> f64 {
        self.predictor.predict(&self.recon)
    }

    fn finish_sample(&mut self, prediction: f64, code: Code) {
        let value = prediction + self.quantizer.dequantize_valid(code);
        self.recon.push(value);
        self.quantizer.adapt_in_place(code);
    }

    fn encode_sample(&mut self, all: &[f64], x: f64) -> Result<Code> {
        self.begin_sample(Some(all))?;
        let p = self.prediction();
        let code = self.quantizer.quantize_finite(x - p);
        self.finish_sample(p, code);
        Ok(code)
    }

    fn decode_sample(&mut self, code: Code) -> Result<()> {
        self.begin_sample(None)?;
        let p = self.prediction();
        self.finish_sample(p, code);
        Ok(())
    }

    fn into_output(mut self) -> (Vec<f64>, Vec<FrameInfo>) {
        self.recon.drain(..self.pad);
        (self.recon, self.frames)
    }
}

fn check_input(signal: &Signal) -> Result<()> {
    if signal.is_empty() {
        return Err(Error::Precondition("signal is empty".into()));
    }
    if let Some(index) = signal.samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if !signal.is_normalized() {
        return Err(Error::Precondition("signal is not normalized to [-1, 1]".into()));
    }
    Ok(())
}

fn run_encoder(signal: &Signal, cfg: &CodecConfig) -> Result<(Vec<Code>, Vec<f64>, Vec<FrameInfo>)> {
    check_input(signal)?;
    let mut engine = Engine::new(cfg, signal.len())?;
    let mut codes = Vec::with_capacity(signal.len());
    for &x in &signal.samples {
        codes.push(engine.encode_sample(&signal.samples, x)?);
    }
    let (recon, frames) = engine.into_output();
    Ok((codes, recon, frames))
}

/// Encodes `signal` with backward adaptation.
pub fn encode(signal: &Signal, cfg: &CodecConfig) -> Result<EncodeOutput> {
    if cfg.adaptation != Adaptation::Backward {
        return Err(Error::Config(
            "forward-unquantized adaptation has no bitstream; use forward_unquantized_mode".into(),
        ));
    }
    let (codes, recon, frames) = run_encoder(signal, cfg)?;
    let report = segsnr(&signal.samples, &recon, cfg.frame_len)?;
    Ok(EncodeOutput {
        bitstream: Bitstream::new(cfg.clone(), &codes),
        reconstruction: Signal {
            samples: recon,
            sample_rate: signal.sample_rate,
        },
        report,
        frames,
    })
}

/// Diagnostic run where frame `k`'s predictor is computed from frame `k`'s
/// original samples.
pub fn forward_unquantized_mode(signal: &Signal, cfg: &CodecConfig) -> Result<ForwardOutput> {
    if cfg.adaptation != Adaptation::ForwardUnquantized {
        return Err(Error::Config("config is not in forward-unquantized mode".into()));
    }
    let (_, recon, frames) = run_encoder(signal, cfg)?;
    let report = segsnr(&signal.samples, &recon, cfg.frame_len)?;
    Ok(ForwardOutput {
        reconstruction: Signal {
            samples: recon,
            sample_rate: signal.sample_rate,
        },
        report,
        frames,
    })
}

/// Reconstructs the signal from a bitstream.
pub fn decode(bs: &Bitstream) -> Result<Signal> {
    Ok(decode_with_frames(bs)?.0)
}

/// Like [`decode`], also returning the per-frame predictor record.
pub fn decode_with_frames(bs: &Bitstream) -> Result<(Signal, Vec<FrameInfo>)> {
    let cfg = &bs.config;
    if cfg.adaptation != Adaptation::Backward {
        return Err(Error::Config("only backward adaptation is decodable".into()));
    }
    let expected = body_len(bs.n_samples, cfg.n_bits());
    if bs.body.len() as u64 != expected {
        return Err(Error::LengthMismatch {
            expected: expected as usize,
            actual: bs.body.len(),
        });
    }
    let codes = bs.codes();
    let mut engine = Engine::new(cfg, codes.len())?;
    for code in codes {
        engine.decode_sample(code)?;
    }
    let (recon, frames) = engine.into_output();
    Ok((
        Signal {
            samples: recon,
            sample_rate: 8000,
        },
        frames,
    ))
}

/// Errors from [`decode_bytes`].
#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error(transparent)]
    Format(#[from] DecodeError),
    #[error(transparent)]
    Numeric(#[from] Error),
}

/// Parses and decodes a serialized bitstream.
pub fn decode_bytes(bytes: &[u8]) -> std::result::Result<Signal, CodecError> {
    let bs = Bitstream::from_bytes(bytes)?;
    Ok(decode(&bs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_input_stays_near_zero() {
        let x = Signal::new(vec![0.0; 1000], 8000).unwrap();
        for cfg in [CodecConfig::lpc(10, 2).unwrap(), CodecConfig::lpc(10, 5).unwrap()] {
            let out = encode(&x, &cfg).unwrap();
            assert!(out.bitstream.codes().iter().all(|c| c.level() == 0));
            let bound = cfg.quantizer.initial_step;
            assert!(out.reconstruction.samples.iter().all(|v| v.abs() <= bound));
            assert_eq!(out.report.frames_counted, 0);
            assert_eq!(out.report.silent_frames, 5);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = CodecConfig::lpc(10, 3).unwrap();
        assert!(encode(&Signal { samples: vec![], sample_rate: 8000 }, &cfg).is_err());
        let bad = Signal { samples: vec![0.0, f64::NAN], sample_rate: 8000 };
        assert_eq!(encode(&bad, &cfg).unwrap_err(), Error::NonFinite { index: 1 });
        let loud = Signal { samples: vec![0.0, 1.5], sample_rate: 8000 };
        assert!(encode(&loud, &cfg).is_err());
        let fwd = cfg.clone().with_adaptation(Adaptation::ForwardUnquantized);
        assert!(encode(&Signal::new(vec![0.1; 300], 8000).unwrap(), &fwd).is_err());
        assert!(forward_unquantized_mode(&Signal::new(vec![0.1; 300], 8000).unwrap(), &cfg).is_err());
    }

    #[test]
    fn body_length_matches_bit_budget() {
        let x = Signal::new((0..1234).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect(), 8000).unwrap();
        for bits in 2..=5u8 {
            let out = encode(&x, &CodecConfig::lpc(10, bits).unwrap()).unwrap();
            assert_eq!(out.bitstream.body.len() as u64, (1234 * bits as u64).div_ceil(8));
        }
    }
}
