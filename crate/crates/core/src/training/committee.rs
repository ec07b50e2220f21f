use super::{train, train_with_validation, Fusion, Selection, StopReason, TrainConfig};
use crate::error::{Error, Result};
use crate::mlp::{Activation, MlpWeights, PredictionSample, N_INPUTS};

/// Result of one multi-start run.
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub init_index: usize,
    pub weights: MlpWeights,
    /// Training mse at the returned weights; non-finite if the start diverged.
    pub train_mse: f64,
    pub epochs_run: usize,
    pub stop: StopReason,
    /// `gamma_eff` after every Bayesian update (empty for plain LM).
    pub gamma_eff_trace: Vec<f64>,
}

impl StartOutcome {
    pub fn diverged(&self) -> bool {
        !(self.train_mse.is_finite() && self.weights.is_finite())
    }
}

/// Weights computed for one frame: a single network or a committee.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPredictor {
    pub members: Vec<MlpWeights>,
    /// `Some` iff this is a committee.
    pub fusion: Option<Fusion>,
    pub activation: Activation,
    pub starts: Vec<StartOutcome>,
    /// Set when every start diverged and the zero predictor was substituted.
    pub fallback: bool,
}

impl TrainedPredictor {
    pub fn single(weights: MlpWeights, activation: Activation) -> Self {
        Self {
            members: vec![weights],
            fusion: None,
            activation,
            starts: Vec::new(),
            fallback: false,
        }
    }

    pub fn zero(activation: Activation) -> Self {
        Self {
            fallback: true,
            ..Self::single(MlpWeights::zeros(), activation)
        }
    }

    pub fn is_committee(&self) -> bool {
        self.fusion.is_some()
    }

    /// Prediction for a 10-sample input, oldest first.
    pub fn predict(&self, input: &[f64]) -> f64 {
        match self.fusion {
            None => self.members[0].eval(self.activation, input),
            Some(fusion) => fuse(&self.members, self.activation, fusion, input),
        }
    }

    /// Training mse of the selected network (best start), if any.
    pub fn selected_train_mse(&self) -> Option<f64> {
        if self.is_committee() || self.fallback {
            return None;
        }
        self.starts
            .iter()
            .find(|s| s.weights == self.members[0])
            .map(|s| s.train_mse)
    }
}

/// Fuses the outputs of `members` on `input` by mean or median.
pub fn committee_predict(
    members: &[MlpWeights],
    activation: Activation,
    fusion: Fusion,
    input: &[f64],
) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::Precondition("committee has no members".into()));
    }
    if input.len() != N_INPUTS {
        return Err(Error::LengthMismatch {
            expected: N_INPUTS,
            actual: input.len(),
        });
    }
    Ok(fuse(members, activation, fusion, input))
}

fn fuse(members: &[MlpWeights], act: Activation, fusion: Fusion, input: &[f64]) -> f64 {
    let mut buf = [0.0f64; 16];
    let mut heap;
    let outputs: &mut [f64] = if members.len() <= buf.len() {
        &mut buf[..members.len()]
    } else {
        heap = vec![0.0; members.len()];
        &mut heap
    };
    for (o, m) in outputs.iter_mut().zip(members) {
        *o = m.eval(act, input);
    }
    fuse_values(outputs, fusion)
}

/// Mean or median of `values`; reorders `values` for the median.
pub(crate) fn fuse_values(values: &mut [f64], fusion: Fusion) -> f64 {
    match fusion {
        Fusion::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Fusion::Median => {
            values.sort_by(f64::total_cmp);
            let n = values.len();
            if n % 2 == 1 {
                values[n / 2]
            } else {
                (values[n / 2 - 1] + values[n / 2]) / 2.0
            }
        }
    }
}

/// Trains `cfg.n_starts` networks from `init_random(seed, frame, i)` and
/// selects or combines them according to `cfg.selection`.
///
/// `validation` is used only when `cfg.validation` is set. Diverged starts
/// are dropped; if none survives the zero predictor is returned with
/// `fallback` set.
/// Start with the smallest training mse among non-diverged starts; ties go
/// to the lowest position in `starts`.
pub fn select_best(starts: &[StartOutcome]) -> Option<&StartOutcome> {
    starts
        .iter()
        .filter(|s| !s.diverged())
        .fold(None, |acc: Option<&StartOutcome>, s| match acc {
            Some(b) if b.train_mse <= s.train_mse => Some(b),
            _ => Some(s),
        })
}

pub fn multi_start(
    data: &[PredictionSample],
    validation: Option<&[PredictionSample]>,
    cfg: &TrainConfig,
    rng_seed: u64,
    frame_index: u64,
) -> Result<TrainedPredictor> {
    cfg.validate()?;
    let val = if cfg.validation { validation } else { None };
    let mut starts = Vec::with_capacity(cfg.n_starts);
    for i in 0..cfg.n_starts {
        let init = MlpWeights::init_random(rng_seed, frame_index, i as u64);
        let (weights, diag) = match val {
            Some(v) => {
                let r = train_with_validation(data, v, init, cfg)?;
                (r.weights, r.diagnostics)
            }
            None => {
                let r = train(data, init, cfg)?;
                (r.weights, r.diagnostics)
            }
        };
        starts.push(StartOutcome {
            init_index: i,
            weights,
            train_mse: diag.final_mse,
            epochs_run: diag.epochs_run(),
            stop: diag.stop,
            gamma_eff_trace: diag.bayes.iter().map(|b| b.gamma_eff).collect(),
        });
    }
    let survivors: Vec<&StartOutcome> = starts.iter().filter(|s| !s.diverged()).collect();
    if survivors.is_empty() {
        return Ok(TrainedPredictor {
            starts,
            ..TrainedPredictor::zero(cfg.activation)
        });
    }
    let (members, fusion) = match cfg.selection {
        Selection::BestTrain => {
            let best = select_best(&starts).expect("non-empty");
            (vec![best.weights], None)
        }
        Selection::Committee(f) => (survivors.iter().map(|s| s.weights).collect(), Some(f)),
    };
    Ok(TrainedPredictor {
        members,
        fusion,
        activation: cfg.activation,
        starts,
        fallback: false,
    })
}
