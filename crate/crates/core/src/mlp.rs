//! The 10-2-1 predictor network.
//!
//! Flattened weight layout (25 values, fixed, part of the bitstream format):
//!
//! | index  | parameter                                   |
//! |--------|---------------------------------------------|
//! | 0..10  | hidden unit 0 input weights, oldest input first |
//! | 10..20 | hidden unit 1 input weights                 |
//! | 20, 21 | hidden biases                               |
//! | 22, 23 | output weights                              |
//! | 24     | output bias                                 |
//!
//! Hidden units use [`Activation`] (tanh by default); the output is linear.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

pub const N_INPUTS: usize = 10;
pub const N_HIDDEN: usize = 2;
pub const N_WEIGHTS: usize = N_HIDDEN * N_INPUTS + N_HIDDEN + N_HIDDEN + 1;

const B1: usize = N_HIDDEN * N_INPUTS;
const W2: usize = B1 + N_HIDDEN;
const B2: usize = W2 + N_HIDDEN;

/// Identifier of the weight-initialization stream, recorded in bitstreams.
pub const PRNG_ID: &str = "chacha8-v1";

/// Hidden-layer transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> (f64, f64) {
        match self {
            Activation::Tanh => {
                let a = z.tanh();
                (a, 1.0 - a * a)
            }
            Activation::Logistic => {
                let a = 1.0 / (1.0 + (-z).exp());
                (a, a * (1.0 - a))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "logistic" => Some(Activation::Logistic),
            _ => None,
        }
    }
}

/// Flattened network parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpWeights(pub [f64; N_WEIGHTS]);

impl Default for MlpWeights {
    fn default() -> Self {
        Self::zeros()
    }
}

impl MlpWeights {
    pub fn zeros() -> Self {
        Self([0.0; N_WEIGHTS])
    }

    pub fn from_slice(w: &[f64]) -> Result<Self> {
        let arr: [f64; N_WEIGHTS] = w.try_into().map_err(|_| Error::LengthMismatch {
            expected: N_WEIGHTS,
            actual: w.len(),
        })?;
        if let Some(index) = arr.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn input_weight(&self, hidden: usize, input: usize) -> f64 {
        self.0[hidden * N_INPUTS + input]
    }

    pub fn hidden_bias(&self, hidden: usize) -> f64 {
        self.0[B1 + hidden]
    }

    pub fn output_weight(&self, hidden: usize) -> f64 {
        self.0[W2 + hidden]
    }

    pub fn output_bias(&self) -> f64 {
        self.0[B2]
    }

    pub fn sum_squares(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }

    /// Deterministic random initialization.
    ///
    /// The ChaCha8 key is `seed (u64 LE) | frame (u64 LE) | start (u64 LE) |
    /// "NLAD" | 0u32`. Each draw is `(next_u64 >> 11) * 2^-53 - 0.5`, scaled
    /// by `1/sqrt(fan_in)` (10 for the hidden layer, 2 for the output
    /// layer), filling the flattened layout in index order.
    pub fn init_random(rng_seed: u64, frame_index: u64, init_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&rng_seed.to_le_bytes());
        key[8..16].copy_from_slice(&frame_index.to_le_bytes());
        key[16..24].copy_from_slice(&init_index.to_le_bytes());
        key[24..28].copy_from_slice(b"NLAD");
        let mut rng = ChaCha8Rng::from_seed(key);
        let hidden_scale = 1.0 / (N_INPUTS as f64).sqrt();
        let output_scale = 1.0 / (N_HIDDEN as f64).sqrt();
        let mut w = [0.0; N_WEIGHTS];
        for (j, slot) in w.iter_mut().enumerate() {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5;
            *slot = u * if j < W2 { hidden_scale } else { output_scale };
        }
        Self(w)
    }

    /// Network output for `input` (oldest sample first).
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        self.forward_with(Activation::Tanh, input)
    }

    pub fn forward_with(&self, act: Activation, input: &[f64]) -> Result<f64> {
        if input.len() != N_INPUTS {
            return Err(Error::LengthMismatch {
                expected: N_INPUTS,
                actual: input.len(),
            });
        }
        if let Some(index) = input.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(self.eval(act, input))
    }

    /// Unchecked forward pass; `input` must hold exactly `N_INPUTS` samples.
    #[inline]
    pub(crate) fn eval(&self, act: Activation, input: &[f64]) -> f64 {
        let w = &self.0;
        let mut out = w[B2];
        for h in 0..N_HIDDEN {
            let row = &w[h * N_INPUTS..(h + 1) * N_INPUTS];
            let mut z = w[B1 + h];
            for (wi, xi) in row.iter().zip(input) {
                z += wi * xi;
            }
            out += w[W2 + h] * act.apply(z).0;
        }
        out
    }

    /// Writes `d output / d w` into `grad`, returning the output.
    #[inline]
    pub(crate) fn output_gradient(&self, act: Activation, input: &[f64], grad: &mut [f64; N_WEIGHTS]) -> f64 {
        let w = &self.0;
        let mut out = w[B2];
        for h in 0..N_HIDDEN {
            let row = &w[h * N_INPUTS..(h + 1) * N_INPUTS];
            let mut z = w[B1 + h];
            for (wi, xi) in row.iter().zip(input) {
                z += wi * xi;
            }
            let (a, da) = act.apply(z);
            out += w[W2 + h] * a;
            let back = w[W2 + h] * da;
            for (g, xi) in grad[h * N_INPUTS..(h + 1) * N_INPUTS].iter_mut().zip(input) {
                *g = back * xi;
            }
            grad[B1 + h] = back;
            grad[W2 + h] = a;
        }
        grad[B2] = 1.0;
        out
    }
}

/// One training pair: ten consecutive samples and the sample that follows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionSample {
    pub input: [f64; N_INPUTS],
    pub target: f64,
}

/// Jacobian of the errors `e_i = target_i - output_i` with respect to the
/// flattened weights, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: Vec<[f64; N_WEIGHTS]>,
    pub errors: Vec<f64>,
}

pub fn jacobian(w: &MlpWeights, samples: &[PredictionSample]) -> Result<Jacobian> {
    jacobian_with(w, Activation::Tanh, samples)
}

pub fn jacobian_with(w: &MlpWeights, act: Activation, samples: &[PredictionSample]) -> Result<Jacobian> {
    if samples.is_empty() {
        return Err(Error::Precondition("jacobian needs at least one sample".into()));
    }
    let mut out = Jacobian {
        rows: Vec::with_capacity(samples.len()),
        errors: Vec::with_capacity(samples.len()),
    };
    fill_jacobian(w, act, samples, &mut out);
    Ok(out)
}

pub(crate) fn fill_jacobian(w: &MlpWeights, act: Activation, samples: &[PredictionSample], out: &mut Jacobian) {
    out.rows.clear();
    out.errors.clear();
    let mut grad = [0.0; N_WEIGHTS];
    for s in samples {
        let y = w.output_gradient(act, &s.input, &mut grad);
        out.errors.push(s.target - y);
        let mut row = [0.0; N_WEIGHTS];
        for (r, g) in row.iter_mut().zip(&grad) {
            *r = -g;
        }
        out.rows.push(row);
    }
}
