//! Framing, linear prediction and segmental SNR.
//!
//! Everything here is a pure function over slices. Frames are
//! non-overlapping, rectangular-windowed, and a tail shorter than one frame
//! is never part of a statistic.

use crate::error::{Error, Result};

/// Upper clamp applied to the SNR of a frame that was reconstructed exactly.
pub const SNR_CLAMP_DB: f64 = 99.0;

/// A mono signal with samples normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Signal {
    /// Wraps `samples`, rejecting non-finite values.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.samples.iter().all(|x| x.abs() <= 1.0)
    }
}

/// One coding frame: `samples` borrows `frame_len` contiguous samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameView<'a> {
    pub index: usize,
    pub samples: &'a [f64],
}

/// The frames of a signal plus the length of the excluded tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Framing<'a> {
    pub frames: Vec<FrameView<'a>>,
    pub tail_len: usize,
}

/// Splits `samples` into `floor(N / frame_len)` ordered frames.
pub fn frame_signal(samples: &[f64], frame_len: usize) -> Result<Framing<'_>> {
    if frame_len == 0 {
        return Err(Error::Precondition("frame_len must be at least 1".into()));
    }
    let frames = samples
        .chunks_exact(frame_len)
        .enumerate()
        .map(|(index, samples)| FrameView { index, samples })
        .collect();
    Ok(Framing {
        frames,
        tail_len: samples.len() % frame_len,
    })
}

/// `r[t] = sum_{n=t}^{L-1} x[n] x[n-t]` for `t = 0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= frame.len() {
        return Err(Error::Precondition(format!(
            "max_lag {max_lag} must be below frame length {}",
            frame.len()
        )));
    }
    Ok((0..=max_lag)
        .map(|lag| {
            frame[lag..]
                .iter()
                .zip(frame)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .collect())
}

/// Direct-form predictor `x^[n] = sum_i a[i] x[n-1-i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcCoefficients {
    pub a: Vec<f64>,
    pub residual_energy: f64,
    /// Order actually reached by the recursion. Less than `order()` when the
    /// recursion was aborted on a non-positive prediction error; the
    /// remaining coefficients are zero.
    pub stable_order: usize,
}

impl LpcCoefficients {
    pub fn zeros(order: usize) -> Self {
        Self {
            a: vec![0.0; order],
            residual_energy: 0.0,
            stable_order: order,
        }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.stable_order < self.a.len()
    }
}

/// Levinson-Durbin recursion on an autocorrelation sequence.
///
/// Fails with [`Error::DegenerateFrame`] when `acf[0] <= 0`. If an
/// intermediate error becomes non-positive, the coefficients of the last
/// stable order are returned with `stable_order` recording where it stopped.
pub fn levinson_durbin(acf: &[f64], order: usize) -> Result<LpcCoefficients> {
    if acf.len() < order + 1 {
        return Err(Error::Precondition(format!(
            "need {} autocorrelation lags, got {}",
            order + 1,
            acf.len()
        )));
    }
    if !(acf[0] > 0.0) {
        return Err(Error::DegenerateFrame(format!(
            "zero-lag autocorrelation {} is not positive",
            acf[0]
        )));
    }
    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut err = acf[0];
    for m in 0..order {
        let mut acc = acf[m + 1];
        for i in 0..m {
            acc -= a[i] * acf[m - i];
        }
        let k = acc / err;
        let next_err = err * (1.0 - k * k);
        if !(next_err > 0.0) || !k.is_finite() {
            return Ok(LpcCoefficients {
                a,
                residual_energy: err,
                stable_order: m,
            });
        }
        prev[..m].copy_from_slice(&a[..m]);
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a[m] = k;
        err = next_err;
    }
    Ok(LpcCoefficients {
        a,
        residual_energy: err,
        stable_order: order,
    })
}

/// One-step prediction from `history` (oldest first, most recent last).
pub fn lpc_predict(coeffs: &LpcCoefficients, history: &[f64]) -> Result<f64> {
    if history.len() != coeffs.order() {
        return Err(Error::LengthMismatch {
            expected: coeffs.order(),
            actual: history.len(),
        });
    }
    Ok(predict_from_tail(&coeffs.a, history))
}

/// Applies `a` to the last `a.len()` samples of `history`.
pub(crate) fn predict_from_tail(a: &[f64], history: &[f64]) -> f64 {
    let p = a.len();
    let n = history.len();
    let mut acc = 0.0;
    for (i, ai) in a.iter().enumerate() {
        acc += ai * history[n - 1 - i];
    }
    debug_assert!(n >= p);
    acc
}

/// Per-frame SNR statistics of a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct SegSnrReport {
    pub per_frame_snr_db: Vec<f64>,
    /// Mean of `per_frame_snr_db`.
    pub segsnr_db: f64,
    /// Population standard deviation of `per_frame_snr_db`.
    pub std_db: f64,
    pub frames_counted: usize,
    /// Frames whose original had zero energy; excluded from mean and std.
    pub silent_frames: usize,
    pub tail_len: usize,
}

impl SegSnrReport {
    /// Builds a report from per-frame values, computing mean and std.
    pub fn from_frames(per_frame_snr_db: Vec<f64>, silent_frames: usize, tail_len: usize) -> Self {
        let (segsnr_db, std_db) = mean_std(&per_frame_snr_db);
        Self {
            frames_counted: per_frame_snr_db.len(),
            per_frame_snr_db,
            segsnr_db,
            std_db,
            silent_frames,
            tail_len,
        }
    }
}

/// Mean and population standard deviation; `(NaN, NaN)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// SNR of a single frame in dB, or `None` when the original is silent.
pub fn frame_snr_db(original: &[f64], reconstructed: &[f64]) -> Option<f64> {
    let signal: f64 = original.iter().map(|x| x * x).sum();
    if signal == 0.0 {
        return None;
    }
    let noise: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    if noise == 0.0 {
        return Some(SNR_CLAMP_DB);
    }
    Some((10.0 * (signal / noise).log10()).min(SNR_CLAMP_DB))
}

/// Segmental SNR of `reconstructed` against `original` over `frame_len` frames.
pub fn segsnr(original: &[f64], reconstructed: &[f64], frame_len: usize) -> Result<SegSnrReport> {
    if original.len() != reconstructed.len() {
        return Err(Error::LengthMismatch {
            expected: original.len(),
            actual: reconstructed.len(),
        });
    }
    let framing = frame_signal(original, frame_len)?;
    let mut per_frame = Vec::with_capacity(framing.frames.len());
    let mut silent = 0;
    for frame in &framing.frames {
        let start = frame.index * frame_len;
        match frame_snr_db(frame.samples, &reconstructed[start..start + frame_len]) {
            Some(snr) => per_frame.push(snr),
            None => silent += 1,
        }
    }
    Ok(SegSnrReport::from_frames(per_frame, silent, framing.tail_len))
}
