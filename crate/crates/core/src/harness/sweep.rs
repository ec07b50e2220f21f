//! SEGSNR as a function of the msereg performance ratio.
//!
//! CSV columns: `gamma,epochs,n_bits,segsnr_db,std_db,frames,seed,config_hash`,
//! preceded by a `#` comment line naming the build and seed.

use crate::codec::{encode, CodecConfig};
use crate::dsp::Signal;
use crate::error::{Error, Result};
use crate::training::{Performance, TrainConfig};

use super::grid::build_id;

/// `0.0, 0.1, ..., 1.0`.
pub fn default_gammas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub epochs: usize,
    pub n_bits: u8,
    pub segsnr_db: f64,
    pub std_db: f64,
    pub frames: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub csv: String,
}

/// One LM + msereg encode per `(epochs, gamma)`; other training settings
/// come from `base`.
pub fn gamma_sweep(
    signal: &Signal,
    gammas: &[f64],
    epochs: &[usize],
    n_bits: u8,
    seed: u64,
    base: &TrainConfig,
) -> Result<SweepResult> {
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::Config(format!("gamma {g} outside [0, 1]")));
    }
    let mut points = Vec::with_capacity(gammas.len() * epochs.len());
    for &e in epochs {
        for &gamma in gammas {
            let train = TrainConfig {
                performance: Performance::MseReg,
                algorithm: crate::training::Algorithm::LevenbergMarquardt,
                gamma,
                epochs: e,
                ..base.clone()
            };
            let cfg = CodecConfig::mlp(train, n_bits)?.with_seed(seed);
            let out = encode(signal, &cfg)?;
            points.push(SweepPoint {
                gamma,
                epochs: e,
                n_bits,
                segsnr_db: out.report.segsnr_db,
                std_db: out.report.std_db,
                frames: out.report.frames_counted,
                config_hash: cfg.config_hash(),
            });
        }
    }
    let mut csv = format!("# {} seed={seed}\n", build_id());
    csv.push_str("gamma,epochs,n_bits,segsnr_db,std_db,frames,seed,config_hash\n");
    for p in &points {
        csv.push_str(&format!(
            "{:?},{},{},{:?},{:?},{},{},{}\n",
            p.gamma, p.epochs, p.n_bits, p.segsnr_db, p.std_db, p.frames, seed, p.config_hash
        ));
    }
    Ok(SweepResult { points, csv })
}
