use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mlp::{N_INPUTS, PRNG_ID};
use crate::quantizer::{QuantizerParams, MULTIPLIER_TABLE_VERSION};
use crate::training::TrainConfig;

pub const DEFAULT_FRAME_LEN: usize = 200;

/// Which predictor the codec recomputes at every frame boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorConfig {
    /// Autocorrelation + Levinson-Durbin of the given order.
    Lpc { order: usize },
    /// 10-2-1 network trained per frame.
    Mlp(TrainConfig),
}

impl PredictorConfig {
    /// Number of past samples the predictor reads.
    pub fn order(&self) -> usize {
        match self {
            PredictorConfig::Lpc { order } => *order,
            PredictorConfig::Mlp(_) => N_INPUTS,
        }
    }

    /// Wire value of the predictor kind byte.
    pub fn kind_byte(&self) -> u8 {
        match self {
            PredictorConfig::Lpc { .. } => 0,
            PredictorConfig::Mlp(_) => 1,
        }
    }
}

/// Where the predictor of frame `k` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adaptation {
    /// From reconstructed frame `k - 1`; nothing is transmitted.
    Backward,
    /// From the original samples of frame `k`. Diagnostic only: the
    /// coefficients would have to be transmitted, so no bitstream exists.
    ForwardUnquantized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub frame_len: usize,
    pub predictor: PredictorConfig,
    pub quantizer: QuantizerParams,
    pub rng_seed: u64,
    pub adaptation: Adaptation,
    /// Restart the quantizer step at `initial_step` at every frame.
    pub reset_quantizer_per_frame: bool,
}

impl CodecConfig {
    pub fn new(predictor: PredictorConfig, n_bits: u8) -> Result<Self> {
        let cfg = Self {
            frame_len: DEFAULT_FRAME_LEN,
            predictor,
            quantizer: QuantizerParams::new(n_bits)?,
            rng_seed: 0,
            adaptation: Adaptation::Backward,
            reset_quantizer_per_frame: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lpc(order: usize, n_bits: u8) -> Result<Self> {
        Self::new(PredictorConfig::Lpc { order }, n_bits)
    }

    pub fn mlp(train: TrainConfig, n_bits: u8) -> Result<Self> {
        Self::new(PredictorConfig::Mlp(train), n_bits)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_adaptation(mut self, adaptation: Adaptation) -> Self {
        self.adaptation = adaptation;
        self
    }

    pub fn n_bits(&self) -> u8 {
        self.quantizer.n_bits
    }

    /// Early stopping with frames `k-2` / `k-1` as training / validation.
    pub fn validation_mode(&self) -> bool {
        matches!(&self.predictor, PredictorConfig::Mlp(t) if t.validation)
    }

    pub fn validate(&self) -> Result<()> {
        self.quantizer.validate()?;
        let order = self.predictor.order();
        if order == 0 {
            return Err(Error::Config("predictor order must be at least 1".into()));
        }
        if self.frame_len <= order {
            return Err(Error::Config(format!(
                "frame length {} must exceed predictor order {order}",
                self.frame_len
            )));
        }
        if self.frame_len > u16::MAX as usize {
            return Err(Error::Config("frame length does not fit in 16 bits".into()));
        }
        if let PredictorConfig::Mlp(t) = &self.predictor {
            t.validate()?;
        }
        Ok(())
    }

    /// Sorted `key=value` entries describing everything the decoder needs
    /// besides the seed and sample count.
    pub fn canonical_entries(&self) -> Vec<(String, String)> {
        let q = &self.quantizer;
        let mut v: Vec<(String, String)> = vec![
            (
                "adaptation".into(),
                match self.adaptation {
                    Adaptation::Backward => "backward",
                    Adaptation::ForwardUnquantized => "forward_unquantized",
                }
                .into(),
            ),
            ("format.version".into(), super::FORMAT_VERSION.to_string()),
            ("frame_len".into(), self.frame_len.to_string()),
            ("quantizer.bits".into(), q.n_bits.to_string()),
            ("quantizer.initial_step".into(), format!("{:?}", q.initial_step)),
            ("quantizer.step_min".into(), format!("{:?}", q.step_min)),
            ("quantizer.step_max".into(), format!("{:?}", q.step_max)),
            (
                "quantizer.multipliers".into(),
                q.multipliers
                    .iter()
                    .map(|m| format!("{m:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("quantizer.table_version".into(), MULTIPLIER_TABLE_VERSION.to_string()),
            (
                "quantizer.reset_per_frame".into(),
                self.reset_quantizer_per_frame.to_string(),
            ),
        ];
        match &self.predictor {
            PredictorConfig::Lpc { order } => {
                v.push(("predictor".into(), "lpc".into()));
                v.push(("lpc.order".into(), order.to_string()));
            }
            PredictorConfig::Mlp(t) => {
                v.push(("predictor".into(), "mlp".into()));
                v.push(("mlp.prng".into(), PRNG_ID.into()));
                v.extend(t.canonical_entries().into_iter().map(|(k, val)| (k.to_string(), val)));
            }
        }
        v.sort();
        v
    }

    /// `key=value\n` lines of [`CodecConfig::canonical_entries`].
    pub fn canonical_text(&self) -> String {
        self.canonical_entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// CRC-32 of the canonical text, as 8 hex digits.
    pub fn config_hash(&self) -> String {
        format!("{:08x}", crc32fast::hash(self.canonical_text().as_bytes()))
    }

    /// Parses a canonical block; `rng_seed` is supplied separately.
    pub fn from_canonical_text(text: &str, rng_seed: u64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed line {line:?}")))?;
            if map.insert(k, v).is_some() {
                return Err(Error::Config(format!("duplicate key {k}")));
            }
        }
        let need = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing key {k}")))
        };
        let parse_f = |k: &str| -> Result<f64> {
            need(k)?
                .parse()
                .map_err(|e| Error::Config(format!("{k}: {e}")))
        };
        let version: u16 = need("format.version")?
            .parse()
            .map_err(|e| Error::Config(format!("format.version: {e}")))?;
        if version != super::FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported format version {version}")));
        }
        let table_version: u16 = need("quantizer.table_version")?
            .parse()
            .map_err(|e| Error::Config(format!("quantizer.table_version: {e}")))?;
        if table_version != MULTIPLIER_TABLE_VERSION {
            return Err(Error::Config(format!(
                "unsupported multiplier table version {table_version}"
            )));
        }
        let parse_bool = |k: &str| match need(k)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Config(format!("{k}: bad flag {other}"))),
        };
        let quantizer = QuantizerParams {
            n_bits: need("quantizer.bits")?
                .parse()
                .map_err(|e| Error::Config(format!("quantizer.bits: {e}")))?,
            initial_step: parse_f("quantizer.initial_step")?,
            step_min: parse_f("quantizer.step_min")?,
            step_max: parse_f("quantizer.step_max")?,
            multipliers: need("quantizer.multipliers")?
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("multiplier: {e}"))))
                .collect::<Result<_>>()?,
        };
        let predictor = match need("predictor")? {
            "lpc" => PredictorConfig::Lpc {
                order: need("lpc.order")?
                    .parse()
                    .map_err(|e| Error::Config(format!("lpc.order: {e}")))?,
            },
            "mlp" => {
                if need("mlp.prng")? != PRNG_ID {
                    return Err(Error::Config("unsupported weight-initialization stream".into()));
                }
                PredictorConfig::Mlp(TrainConfig::from_entries(|k| map.get(k).copied())?)
            }
            other => return Err(Error::Config(format!("unknown predictor {other}"))),
        };
        let cfg = CodecConfig {
            frame_len: need("frame_len")?
                .parse()
                .map_err(|e| Error::Config(format!("frame_len: {e}")))?,
            predictor,
            quantizer,
            rng_seed,
            adaptation: match need("adaptation")? {
                "backward" => Adaptation::Backward,
                "forward_unquantized" => Adaptation::ForwardUnquantized,
                other => return Err(Error::Config(format!("unknown adaptation {other}"))),
            },
            reset_quantizer_per_frame: parse_bool("quantizer.reset_per_frame")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
