//! Backward-adaptive mid-rise quantizer with one-word-memory (Jayant) step
//! adaptation.
//!
//! The step size after each sample depends only on the emitted code, so a
//! decoder that sees the same codes walks through the same states.
//!
//! A code is a signed integer in `[-2^(b-1), 2^(b-1) - 1]`. Non-negative
//! codes carry magnitude level `c`, negative codes carry level `-c - 1`.
//! A residual of exactly zero maps to the positive side.

use crate::error::{Error, Result};

pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 5;

pub const DEFAULT_INITIAL_STEP: f64 = 0.02;
pub const DEFAULT_STEP_MIN: f64 = 1e-5;
pub const DEFAULT_STEP_MAX: f64 = 0.5;

/// Version tag of the default multiplier tables below. Part of the
/// bitstream format.
pub const MULTIPLIER_TABLE_VERSION: u16 = 1;

const MULT_2: [f64; 2] = [0.845, 1.96];
const MULT_3: [f64; 4] = [0.845, 1.0, 1.0, 1.4];
// 4 and 5 bits: log-linear, m[l] = exp(a ((l + 0.5) / L - t)) rounded to
// three decimals; (a, t) = (0.65, 0.25) and (0.85, 0.2).
const MULT_4: [f64; 8] = [0.885, 0.96, 1.041, 1.13, 1.225, 1.329, 1.441, 1.563];
const MULT_5: [f64; 16] = [
    0.866, 0.914, 0.963, 1.016, 1.072, 1.13, 1.192, 1.257,
    1.325, 1.398, 1.474, 1.554, 1.639, 1.728, 1.823, 1.922,
];

/// Default multiplier table for `n_bits`, indexed by magnitude level.
pub fn default_multipliers(n_bits: u8) -> Result<&'static [f64]> {
    match n_bits {
        2 => Ok(&MULT_2),
        3 => Ok(&MULT_3),
        4 => Ok(&MULT_4),
        5 => Ok(&MULT_5),
        _ => Err(bits_error(n_bits)),
    }
}

fn bits_error(n_bits: u8) -> Error {
    Error::Config(format!(
        "n_bits {n_bits} outside supported range {MIN_BITS}..={MAX_BITS}"
    ))
}

/// Step-size constants and multiplier table of a quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerParams {
    pub n_bits: u8,
    pub initial_step: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub multipliers: Vec<f64>,
}

impl QuantizerParams {
    /// Default constants for `n_bits`.
    pub fn new(n_bits: u8) -> Result<Self> {
        Ok(Self {
            n_bits,
            initial_step: DEFAULT_INITIAL_STEP,
            step_min: DEFAULT_STEP_MIN,
            step_max: DEFAULT_STEP_MAX,
            multipliers: default_multipliers(n_bits)?.to_vec(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_BITS..=MAX_BITS).contains(&self.n_bits) {
            return Err(bits_error(self.n_bits));
        }
        if !(self.step_min > 0.0 && self.step_min <= self.step_max && self.step_max.is_finite()) {
            return Err(Error::Config(format!(
                "invalid step bounds [{}, {}]",
                self.step_min, self.step_max
            )));
        }
        if !(self.step_min..=self.step_max).contains(&self.initial_step) {
            return Err(Error::Config(format!(
                "initial step {} outside [{}, {}]",
                self.initial_step, self.step_min, self.step_max
            )));
        }
        let levels = 1usize << (self.n_bits - 1);
        if self.multipliers.len() != levels {
            return Err(Error::Config(format!(
                "multiplier table has {} entries, expected {levels}",
                self.multipliers.len()
            )));
        }
        if !self.multipliers.iter().all(|m| *m > 0.0 && m.is_finite()) {
            return Err(Error::Config("multipliers must be positive".into()));
        }
        Ok(())
    }
}

/// Quantizer code: sign and magnitude level packed in `n_bits` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Code(pub i8);

impl Code {
    pub fn from_level(level: usize, negative: bool) -> Self {
        if negative {
            Code(-(level as i8) - 1)
        } else {
            Code(level as i8)
        }
    }

    pub fn level(self) -> usize {
        if self.0 < 0 {
            (-(self.0 as i16) - 1) as usize
        } else {
            self.0 as usize
        }
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Low `n_bits` of the two's-complement representation.
    pub fn to_bits(self, n_bits: u8) -> u8 {
        (self.0 as u8) & ((1u8 << n_bits) - 1)
    }

    /// Sign-extends an `n_bits` field.
    pub fn from_bits(bits: u8, n_bits: u8) -> Self {
        let shift = 8 - n_bits;
        Code(((bits << shift) as i8) >> shift)
    }

    pub fn fits(self, n_bits: u8) -> bool {
        let half = 1i16 << (n_bits - 1);
        (-half..half).contains(&(self.0 as i16))
    }
}

/// Adaptive quantizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerState {
    pub params: QuantizerParams,
    pub step: f64,
}

impl QuantizerState {
    /// Default tables with a custom initial step.
    pub fn init(n_bits: u8, initial_step: f64) -> Result<Self> {
        let mut params = QuantizerParams::new(n_bits)?;
        params.initial_step = initial_step;
        Self::from_params(params)
    }

    pub fn from_params(params: QuantizerParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            step: params.initial_step,
            params,
        })
    }

    pub fn n_bits(&self) -> u8 {
        self.params.n_bits
    }

    pub fn max_level(&self) -> usize {
        (1usize << (self.params.n_bits - 1)) - 1
    }

    pub fn quantize(&self, residual: f64) -> Result<Code> {
        if !residual.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(self.quantize_finite(residual))
    }

    pub(crate) fn quantize_finite(&self, residual: f64) -> Code {
        let scaled = (residual.abs() / self.step).floor();
        let level = if scaled >= self.max_level() as f64 {
            self.max_level()
        } else {
            scaled as usize
        };
        Code::from_level(level, residual < 0.0)
    }

    pub fn dequantize(&self, code: Code) -> Result<f64> {
        if !code.fits(self.params.n_bits) {
            return Err(Error::Precondition(format!(
                "code {} not representable in {} bits",
                code.0, self.params.n_bits
            )));
        }
        Ok(self.dequantize_valid(code))
    }

    pub(crate) fn dequantize_valid(&self, code: Code) -> f64 {
        let magnitude = (code.level() as f64 + 0.5) * self.step;
        if code.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Next state after emitting `code`.
    pub fn adapt(&self, code: Code) -> Self {
        let mut next = self.clone();
        next.adapt_in_place(code);
        next
    }

    pub(crate) fn adapt_in_place(&mut self, code: Code) {
        let m = self.params.multipliers[code.level().min(self.max_level())];
        self.step = (self.step * m).clamp(self.params.step_min, self.params.step_max);
    }

    pub fn reset(&mut self) {
        self.step = self.params.initial_step;
    }
}
