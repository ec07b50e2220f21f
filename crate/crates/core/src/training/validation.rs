use super::{dataset_mse, StopReason, TrainConfig, TrainDiagnostics, Trainer};
use crate::error::{Error, Result};
use crate::mlp::{MlpWeights, PredictionSample};

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationResult {
    /// Snapshot at the validation minimum.
    pub weights: MlpWeights,
    /// Epoch (1-based) of the validation minimum; 0 if no step was taken.
    pub best_epoch: usize,
    /// Last epoch that was run.
    pub stop_epoch: usize,
    /// Validation mse after each epoch, starting with epoch 1.
    pub validation_trace: Vec<f64>,
    pub diagnostics: TrainDiagnostics,
}

impl ValidationResult {
    pub fn best_validation_mse(&self) -> Option<f64> {
        self.best_epoch
            .checked_sub(1)
            .map(|i| self.validation_trace[i])
    }
}

/// Runs the trainer named in `cfg` epoch by epoch, monitoring mse on
/// `val_data`, and stops after `cfg.patience` epochs without a new minimum.
pub fn train_with_validation(
    train_data: &[PredictionSample],
    val_data: &[PredictionSample],
    init: MlpWeights,
    cfg: &TrainConfig,
) -> Result<ValidationResult> {
    if val_data.is_empty() {
        return Err(Error::Precondition("validation set is empty".into()));
    }
    let mut trainer = Trainer::new(train_data, init, cfg)?;
    let mut trace = Vec::new();
    let mut best = (0usize, f64::INFINITY, init);
    let mut since_best = 0;
    let stop = loop {
        if trainer.epochs_run() >= cfg.epochs {
            break StopReason::EpochLimit;
        }
        match trainer.step() {
            super::StepOutcome::Accepted => {}
            super::StepOutcome::MuLimit => break StopReason::MuLimit,
            super::StepOutcome::Converged => {
                // The converging step was still taken; score it.
                if trainer.epochs_run() > trace.len() {
                    let v = dataset_mse(trainer.weights(), cfg.activation, val_data);
                    trace.push(v);
                    if v < best.1 {
                        best = (trainer.epochs_run(), v, *trainer.weights());
                    }
                }
                break StopReason::Converged;
            }
        }
        let v = dataset_mse(trainer.weights(), cfg.activation, val_data);
        trace.push(v);
        if v < best.1 {
            best = (trainer.epochs_run(), v, *trainer.weights());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break StopReason::Validation;
            }
        }
    };
    let stop_epoch = trainer.epochs_run();
    let mut result = trainer.finish(stop);
    if best.0 > 0 {
        result.diagnostics.final_mse = dataset_mse(&best.2, cfg.activation, train_data);
    }
    Ok(ValidationResult {
        weights: best.2,
        best_epoch: best.0,
        stop_epoch,
        validation_trace: trace,
        diagnostics: result.diagnostics,
    })
}
