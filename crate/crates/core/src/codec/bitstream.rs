//! Bitstream layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NLAD"
//! 4       2     format version (u16)
//! 6       1     bits per sample N_q (u8)
//! 7       2     frame length (u16)
//! 9       1     predictor kind (0 = LPC, 1 = MLP)
//! 10      4     config block length L (u32)
//! 14      L     canonical config block, UTF-8 `key=value\n` lines
//! 14+L    8     rng seed (u64)
//! 22+L    8     sample count (u64)
//! 30+L    4     CRC-32 of bytes 0..30+L
//! 34+L    ...   codes, N_q bits each, packed MSB-first, zero-padded
//! ```

use super::config::{Adaptation, CodecConfig};
use super::FORMAT_VERSION;
use crate::error::{DecodeError, DecodeErrorKind};
use crate::quantizer::Code;

pub const MAGIC: [u8; 4] = *b"NLAD";

/// A parsed or freshly encoded stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub config: CodecConfig,
    pub n_samples: u64,
    /// Packed codes; exactly `ceil(n_samples * N_q / 8)` bytes.
    pub body: Vec<u8>,
}

/// Number of body bytes for `n_samples` codes of `n_bits` each.
pub fn body_len(n_samples: u64, n_bits: u8) -> u64 {
    (n_samples * n_bits as u64).div_ceil(8)
}

/// Packs codes MSB-first.
pub fn pack_codes(codes: &[Code], n_bits: u8) -> Vec<u8> {
    let mut out = vec![0u8; body_len(codes.len() as u64, n_bits) as usize];
    let mut bit = 0usize;
    for c in codes {
        let v = c.to_bits(n_bits);
        for b in (0..n_bits).rev() {
            if (v >> b) & 1 == 1 {
                out[bit / 8] |= 0x80 >> (bit % 8);
            }
            bit += 1;
        }
    }
    out
}

/// Unpacks `count` codes; `body` must hold at least `body_len(count)` bytes.
pub fn unpack_codes(body: &[u8], n_bits: u8, count: usize) -> Vec<Code> {
    let mut codes = Vec::with_capacity(count);
    let mut bit = 0usize;
    for _ in 0..count {
        let mut v = 0u8;
        for _ in 0..n_bits {
            v = (v << 1) | ((body[bit / 8] >> (7 - bit % 8)) & 1);
            bit += 1;
        }
        codes.push(Code::from_bits(v, n_bits));
    }
    codes
}

impl Bitstream {
    pub fn new(config: CodecConfig, codes: &[Code]) -> Self {
        let body = pack_codes(codes, config.n_bits());
        Self {
            config,
            n_samples: codes.len() as u64,
            body,
        }
    }

    pub fn codes(&self) -> Vec<Code> {
        unpack_codes(&self.body, self.config.n_bits(), self.n_samples as usize)
    }

    pub fn header_bytes(&self) -> Vec<u8> {
        let cfg = &self.config;
        let block = cfg.canonical_text();
        let mut h = Vec::with_capacity(34 + block.len());
        h.extend_from_slice(&MAGIC);
        h.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        h.push(cfg.n_bits());
        h.extend_from_slice(&(cfg.frame_len as u16).to_le_bytes());
        h.push(cfg.predictor.kind_byte());
        h.extend_from_slice(&(block.len() as u32).to_le_bytes());
        h.extend_from_slice(block.as_bytes());
        h.extend_from_slice(&cfg.rng_seed.to_le_bytes());
        h.extend_from_slice(&self.n_samples.to_le_bytes());
        let crc = crc32fast::hash(&h);
        h.extend_from_slice(&crc.to_le_bytes());
        h
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header_bytes();
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let err = |kind, offset| Err(DecodeError::new(kind, offset));
        let take = |start: usize, len: usize| -> Result<&[u8], DecodeError> {
            bytes
                .get(start..start + len)
                .ok_or_else(|| DecodeError::new(DecodeErrorKind::TruncatedHeader, bytes.len()))
        };
        let magic: [u8; 4] = take(0, 4)?.try_into().unwrap();
        if magic != MAGIC {
            return err(DecodeErrorKind::BadMagic(magic), 0);
        }
        let version = u16::from_le_bytes(take(4, 2)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return err(DecodeErrorKind::UnsupportedVersion(version), 4);
        }
        let block_len = u32::from_le_bytes(take(10, 4)?.try_into().unwrap()) as usize;
        let crc_at = 14usize
            .checked_add(block_len)
            .and_then(|v| v.checked_add(16))
            .ok_or_else(|| DecodeError::new(DecodeErrorKind::TruncatedHeader, 10))?;
        let stored = u32::from_le_bytes(take(crc_at, 4)?.try_into().unwrap());
        let computed = crc32fast::hash(&bytes[..crc_at]);
        if stored != computed {
            return err(DecodeErrorKind::ChecksumMismatch { stored, computed }, crc_at);
        }

        let n_bits = bytes[6];
        let frame_len = u16::from_le_bytes(take(7, 2)?.try_into().unwrap());
        let kind = bytes[9];
        let block = std::str::from_utf8(&bytes[14..14 + block_len])
            .map_err(|e| DecodeError::new(DecodeErrorKind::BadConfig(e.to_string()), 14))?;
        let seed = u64::from_le_bytes(take(14 + block_len, 8)?.try_into().unwrap());
        let n_samples = u64::from_le_bytes(take(22 + block_len, 8)?.try_into().unwrap());
        let config = CodecConfig::from_canonical_text(block, seed)
            .map_err(|e| DecodeError::new(DecodeErrorKind::BadConfig(e.to_string()), 14))?;
        let mismatch = |what: &str, offset| {
            Err(DecodeError::new(
                DecodeErrorKind::BadConfig(format!("{what} disagrees with config block")),
                offset,
            ))
        };
        if config.n_bits() != n_bits {
            return mismatch("bits per sample", 6);
        }
        if config.frame_len != frame_len as usize {
            return mismatch("frame length", 7);
        }
        if config.predictor.kind_byte() != kind {
            return mismatch("predictor kind", 9);
        }
        if config.adaptation != Adaptation::Backward {
            return err(
                DecodeErrorKind::BadConfig("only backward adaptation is decodable".into()),
                14,
            );
        }

        let body_start = crc_at + 4;
        let body = &bytes[body_start..];
        let expected = body_len(n_samples, n_bits);
        if (body.len() as u64) < expected {
            return err(
                DecodeErrorKind::TruncatedBody {
                    expected: n_samples,
                    actual: body.len() as u64 * 8 / n_bits as u64,
                },
                bytes.len(),
            );
        }
        if body.len() as u64 > expected {
            return err(DecodeErrorKind::TrailingBytes, body_start + expected as usize);
        }
        Ok(Self {
            config,
            n_samples,
            body: body.to_vec(),
        })
    }
}
