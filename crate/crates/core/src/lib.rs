//! Backward-adaptive ADPCM with linear and neural predictors.
//!
//! The codec predicts every sample from the ten (or `p`) previously
//! reconstructed samples, quantizes the prediction error with a Jayant
//! adaptive quantizer and recomputes the predictor once per 200-sample frame
//! from data the decoder already has. Predictors are either LPC coefficients
//! (autocorrelation + Levinson-Durbin) or a 10-2-1 MLP trained with
//! Levenberg-Marquardt, optionally regularized, Bayesian-regularized,
//! early-stopped, multi-started or combined into a committee.
//!
//! Modules, bottom-up:
//!
//! * [`dsp`]: framing, autocorrelation, Levinson-Durbin, segmental SNR;
//! * [`quantizer`]: the adaptive scalar quantizer;
//! * [`mlp`]: the 10-2-1 network and its Jacobian;
//! * [`training`]: per-frame weight computation;
//! * [`codec`]: the encoder/decoder state machine and bitstream;
//! * [`harness`]: WAV I/O, synthetic corpus, experiment grid and sweeps.

pub mod codec;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod mlp;
pub mod quantizer;
pub mod training;

pub use error::{DecodeError, DecodeErrorKind, Error, Result};
