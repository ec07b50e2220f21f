//! Per-frame weight computation for the MLP predictor.
//!
//! All trainers share one Levenberg-Marquardt stepper ([`Trainer`]); they
//! differ only in the objective it minimizes:
//!
//! * `mse`: mean squared prediction error;
//! * `msereg`: `gamma * mse + (1 - gamma) * mean(w^2)`;
//! * Bayesian regularization: `beta * E_D + alpha * E_W` with `alpha` and
//!   `beta` re-estimated after every accepted step.
//!
//! On top of that sit early stopping against a validation set,
//! multi-start selection and committees.

mod committee;
mod lm;
mod validation;

pub use committee::{committee_predict, multi_start, select_best, StartOutcome, TrainedPredictor};
pub use lm::{
    train, train_bayes, train_lm, BayesRecord, StepOutcome, StepRecord, StopReason,
    TrainDiagnostics, TrainResult, Trainer,
};
pub use validation::{train_with_validation, ValidationResult};

use crate::error::{Error, Result};
use crate::mlp::{Activation, MlpWeights, PredictionSample, N_INPUTS, N_WEIGHTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    LevenbergMarquardt,
    BayesianRegularization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Performance {
    Mse,
    MseReg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fusion {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    BestTrain,
    Committee(Fusion),
}

/// Training regime for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub performance: Performance,
    /// Performance ratio; only used with [`Performance::MseReg`].
    pub gamma: f64,
    pub epochs: usize,
    pub n_starts: usize,
    pub selection: Selection,
    pub validation: bool,
    pub patience: usize,
    pub mu0: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    pub mu_max: f64,
    pub activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::LevenbergMarquardt,
            performance: Performance::Mse,
            gamma: 0.9,
            epochs: 6,
            n_starts: 5,
            selection: Selection::BestTrain,
            validation: false,
            patience: 5,
            mu0: 1e-2,
            mu_inc: 10.0,
            mu_dec: 0.1,
            mu_max: 1e10,
            activation: Activation::Tanh,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.n_starts == 0 {
            return bad("n_starts must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        for (name, v) in [
            ("mu0", self.mu0),
            ("mu_inc", self.mu_inc),
            ("mu_dec", self.mu_dec),
            ("mu_max", self.mu_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical_entries(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            (
                "train.algorithm",
                match self.algorithm {
                    Algorithm::LevenbergMarquardt => "lm",
                    Algorithm::BayesianRegularization => "br",
                }
                .to_string(),
            ),
            (
                "train.performance",
                match self.performance {
                    Performance::Mse => "mse",
                    Performance::MseReg => "msereg",
                }
                .to_string(),
            ),
            ("train.gamma", format!("{:?}", self.gamma)),
            ("train.epochs", self.epochs.to_string()),
            ("train.n_starts", self.n_starts.to_string()),
            (
                "train.selection",
                match self.selection {
                    Selection::BestTrain => "best",
                    Selection::Committee(Fusion::Mean) => "cmean",
                    Selection::Committee(Fusion::Median) => "cmedian",
                }
                .to_string(),
            ),
            ("train.validation", self.validation.to_string()),
            ("train.patience", self.patience.to_string()),
            ("train.mu0", format!("{:?}", self.mu0)),
            ("train.mu_inc", format!("{:?}", self.mu_inc)),
            ("train.mu_dec", format!("{:?}", self.mu_dec)),
            ("train.mu_max", format!("{:?}", self.mu_max)),
            ("train.activation", self.activation.name().to_string()),
        ];
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Inverse of [`TrainConfig::canonical_entries`]; `get` looks up a key.
    pub fn from_entries<'a>(get: impl Fn(&str) -> Option<&'a str>) -> Result<Self> {
        let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key {k}")));
        let num = |k: &str| -> Result<f64> {
            need(k)?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("{k}: {e}")))
        };
        let int = |k: &str| -> Result<usize> {
            need(k)?
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("{k}: {e}")))
        };
        let cfg = TrainConfig {
            algorithm: match need("train.algorithm")? {
                "lm" => Algorithm::LevenbergMarquardt,
                "br" => Algorithm::BayesianRegularization,
                other => return Err(Error::Config(format!("unknown algorithm {other}"))),
            },
            performance: match need("train.performance")? {
                "mse" => Performance::Mse,
                "msereg" => Performance::MseReg,
                other => return Err(Error::Config(format!("unknown performance {other}"))),
            },
            gamma: num("train.gamma")?,
            epochs: int("train.epochs")?,
            n_starts: int("train.n_starts")?,
            selection: parse_selection(need("train.selection")?)?,
            validation: match need("train.validation")? {
                "true" => true,
                "false" => false,
                other => return Err(Error::Config(format!("bad validation flag {other}"))),
            },
            patience: int("train.patience")?,
            mu0: num("train.mu0")?,
            mu_inc: num("train.mu_inc")?,
            mu_dec: num("train.mu_dec")?,
            mu_max: num("train.mu_max")?,
            activation: Activation::parse(need("train.activation")?)
                .ok_or_else(|| Error::Config("unknown activation".into()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_selection(s: &str) -> Result<Selection> {
    match s {
        "best" => Ok(Selection::BestTrain),
        "cmean" => Ok(Selection::Committee(Fusion::Mean)),
        "cmedian" => Ok(Selection::Committee(Fusion::Median)),
        other => Err(Error::Config(format!("unknown selection {other}"))),
    }
}

/// Sliding-window training pairs from one frame, never crossing its edges.
pub fn make_dataset(frame: &[f64]) -> Result<Vec<PredictionSample>> {
    if frame.len() <= N_INPUTS {
        return Err(Error::DegenerateFrame(format!(
            "frame of {} samples yields no training pairs",
            frame.len()
        )));
    }
    Ok(frame
        .windows(N_INPUTS + 1)
        .map(|win| {
            let mut input = [0.0; N_INPUTS];
            input.copy_from_slice(&win[..N_INPUTS]);
            PredictionSample {
                input,
                target: win[N_INPUTS],
            }
        })
        .collect())
}

/// `(1/N) * sum(e^2)`; zero for an empty slice.
pub fn mse(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64
}

/// `gamma * mse(e) + (1 - gamma) * (1/n) * sum(w^2)` with `n = 25`.
pub fn msereg(errors: &[f64], w: &MlpWeights, gamma: f64) -> f64 {
    gamma * mse(errors) + (1.0 - gamma) * (w.sum_squares() / N_WEIGHTS as f64)
}

/// Prediction errors of `w` over `data`.
pub fn errors(w: &MlpWeights, act: Activation, data: &[PredictionSample]) -> Vec<f64> {
    data.iter().map(|s| s.target - w.eval(act, &s.input)).collect()
}

/// Mean squared prediction error of `w` over `data`.
pub fn dataset_mse(w: &MlpWeights, act: Activation, data: &[PredictionSample]) -> f64 {
    mse(&errors(w, act, data))
}
