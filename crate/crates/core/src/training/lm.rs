use nalgebra::{SMatrix, SVector};

use super::{msereg, mse, Algorithm, Performance, TrainConfig};
use crate::error::{Error, Result};
use crate::mlp::{fill_jacobian, Activation, Jacobian, MlpWeights, PredictionSample, N_WEIGHTS};

type Mat = SMatrix<f64, N_WEIGHTS, N_WEIGHTS>;
type Vect = SVector<f64, N_WEIGHTS>;

/// Floor applied to `E_W` in the `alpha` re-estimate.
const EW_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Objective {
    /// `gamma * mse + (1 - gamma) * mean(w^2)`; plain mse is `gamma == 1`.
    Regularized { gamma: f64 },
    /// `beta * E_D + alpha * E_W`.
    Bayes { alpha: f64, beta: f64 },
}

impl Objective {
    fn value(&self, e: &[f64], w: &MlpWeights) -> f64 {
        match *self {
            Objective::Regularized { gamma } if gamma == 1.0 => mse(e),
            Objective::Regularized { gamma } => msereg(e, w, gamma),
            Objective::Bayes { alpha, beta } => {
                beta * e.iter().map(|v| v * v).sum::<f64>() + alpha * w.sum_squares()
            }
        }
    }

    /// `(c_d, c_w)` such that the Gauss-Newton system of the objective is
    /// `(c_d J'J + c_w I) dw = -(c_d J'e + c_w w)`.
    ///
    /// For the regularized objective both terms are scaled by `N` so plain
    /// mse reduces to the textbook `(J'J + mu I) dw = -J'e`.
    fn coefficients(&self, n_samples: usize) -> (f64, f64) {
        match *self {
            Objective::Regularized { gamma } => {
                (gamma, n_samples as f64 * (1.0 - gamma) / N_WEIGHTS as f64)
            }
            Objective::Bayes { alpha, beta } => (beta, alpha),
        }
    }
}

/// Why a training run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EpochLimit,
    /// Damping exceeded `mu_max` without finding a decreasing step.
    MuLimit,
    /// Training error reached exactly zero.
    Converged,
    /// Early stopping on the validation set.
    Validation,
}

/// Objective value before and after one accepted step, both under the
/// objective that was in force when the step was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub before: f64,
    pub after: f64,
    pub mu: f64,
}

/// Hyperparameters after one Bayesian update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesRecord {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_eff: f64,
    /// `beta E_D / (beta E_D + alpha E_W)`, for comparison with a fixed
    /// performance ratio.
    pub implied_ratio: f64,
    pub sse: f64,
    pub ssw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainDiagnostics {
    pub initial_performance: f64,
    pub steps: Vec<StepRecord>,
    pub bayes: Vec<BayesRecord>,
    pub stop: StopReason,
    pub final_performance: f64,
    pub final_mse: f64,
}

impl TrainDiagnostics {
    pub fn epochs_run(&self) -> usize {
        self.steps.len()
    }

    /// Initial objective followed by the value after each accepted step.
    pub fn performance_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial_performance)
            .chain(self.steps.iter().map(|s| s.after))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub weights: MlpWeights,
    pub diagnostics: TrainDiagnostics,
}

/// Outcome of a single [`Trainer::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    MuLimit,
    Converged,
}

/// Levenberg-Marquardt stepper; one accepted step is one epoch.
pub struct Trainer<'a> {
    data: &'a [PredictionSample],
    act: Activation,
    mu: f64,
    mu_inc: f64,
    mu_dec: f64,
    mu_max: f64,
    objective: Objective,
    weights: MlpWeights,
    jac: Jacobian,
    performance: f64,
    initial_performance: f64,
    steps: Vec<StepRecord>,
    bayes: Vec<BayesRecord>,
    done: Option<StopReason>,
}

impl<'a> Trainer<'a> {
    /// Trainer for `cfg.algorithm`, starting at `init`.
    pub fn new(data: &'a [PredictionSample], init: MlpWeights, cfg: &TrainConfig) -> Result<Self> {
        let objective = match cfg.algorithm {
            Algorithm::BayesianRegularization => Objective::Bayes {
                alpha: 0.0,
                beta: 1.0,
            },
            Algorithm::LevenbergMarquardt => match cfg.performance {
                Performance::Mse => Objective::Regularized { gamma: 1.0 },
                Performance::MseReg => Objective::Regularized { gamma: cfg.gamma },
            },
        };
        Self::with_objective(data, init, cfg, objective)
    }

    fn with_objective(
        data: &'a [PredictionSample],
        init: MlpWeights,
        cfg: &TrainConfig,
        objective: Objective,
    ) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::Precondition("training set is empty".into()));
        }
        if !init.is_finite() {
            return Err(Error::Precondition("initial weights are not finite".into()));
        }
        let mut jac = Jacobian {
            rows: Vec::with_capacity(data.len()),
            errors: Vec::with_capacity(data.len()),
        };
        fill_jacobian(&init, cfg.activation, data, &mut jac);
        let performance = objective.value(&jac.errors, &init);
        let done = if jac.errors.iter().all(|e| *e == 0.0) {
            Some(StopReason::Converged)
        } else {
            None
        };
        Ok(Self {
            data,
            act: cfg.activation,
            mu: cfg.mu0,
            mu_inc: cfg.mu_inc,
            mu_dec: cfg.mu_dec,
            mu_max: cfg.mu_max,
            objective,
            weights: init,
            jac,
            performance,
            initial_performance: performance,
            steps: Vec::new(),
            bayes: Vec::new(),
            done,
        })
    }

    pub fn weights(&self) -> &MlpWeights {
        &self.weights
    }

    pub fn performance(&self) -> f64 {
        self.performance
    }

    pub fn epochs_run(&self) -> usize {
        self.steps.len()
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.done
    }

    /// Training mse at the current weights.
    pub fn current_mse(&self) -> f64 {
        mse(&self.jac.errors)
    }

    /// Takes one accepted LM step, retrying with larger damping as needed.
    pub fn step(&mut self) -> StepOutcome {
        match self.done {
            Some(StopReason::Converged) => return StepOutcome::Converged,
            Some(_) => return StepOutcome::MuLimit,
            None => {}
        }
        let (c_d, c_w) = self.objective.coefficients(self.data.len());
        let (jtj, jte) = normal_equations(&self.jac);
        let w = Vect::from_column_slice(&self.weights.0);
        let mut hessian = jtj * c_d;
        let mut gradient = jte * c_d;
        if c_w != 0.0 {
            for i in 0..N_WEIGHTS {
                hessian[(i, i)] += c_w;
            }
            gradient += w * c_w;
        }
        let mut trial_errors = Vec::with_capacity(self.data.len());
        loop {
            let mut damped = hessian;
            for i in 0..N_WEIGHTS {
                damped[(i, i)] += self.mu;
            }
            if let Some(chol) = damped.cholesky() {
                let delta = chol.solve(&(-gradient));
                let mut trial = self.weights;
                for (t, d) in trial.0.iter_mut().zip(delta.iter()) {
                    *t += d;
                }
                if trial.is_finite() {
                    trial_errors.clear();
                    trial_errors.extend(
                        self.data.iter().map(|s| s.target - trial.eval(self.act, &s.input)),
                    );
                    let value = self.objective.value(&trial_errors, &trial);
                    if value.is_finite() && value < self.performance {
                        self.accept(trial, value);
                        return match self.done {
                            Some(StopReason::Converged) => StepOutcome::Converged,
                            _ => StepOutcome::Accepted,
                        };
                    }
                }
            }
            self.mu *= self.mu_inc;
            if self.mu > self.mu_max {
                self.done = Some(StopReason::MuLimit);
                return StepOutcome::MuLimit;
            }
        }
    }

    fn accept(&mut self, trial: MlpWeights, value: f64) {
        self.steps.push(StepRecord {
            before: self.performance,
            after: value,
            mu: self.mu,
        });
        self.weights = trial;
        self.performance = value;
        self.mu *= self.mu_dec;
        fill_jacobian(&self.weights, self.act, self.data, &mut self.jac);
        if let Objective::Bayes { .. } = self.objective {
            self.update_hyperparameters();
        } else if value == 0.0 {
            self.done = Some(StopReason::Converged);
        }
    }

    /// Re-estimates `alpha` and `beta` from the effective number of
    /// parameters `gamma_eff = n - 2 alpha tr(H^-1)`, `H = 2 beta J'J + 2 alpha I`.
    fn update_hyperparameters(&mut self) {
        let Objective::Bayes { mut alpha, mut beta } = self.objective else {
            return;
        };
        let sse: f64 = self.jac.errors.iter().map(|e| e * e).sum();
        if sse == 0.0 {
            self.done = Some(StopReason::Converged);
            return;
        }
        let ssw = self.weights.sum_squares().max(EW_FLOOR);
        let n_data = self.data.len() as f64;
        let (jtj, _) = normal_equations(&self.jac);
        let mut gamma_eff = N_WEIGHTS as f64;
        // With alpha == 0 the first estimate is the full parameter count;
        // re-estimate once from it so the recorded value reflects a
        // non-degenerate prior.
        let passes = if alpha == 0.0 { 2 } else { 1 };
        for _ in 0..passes {
            if alpha > 0.0 {
                let h = jtj * (2.0 * beta) + Mat::identity() * (2.0 * alpha);
                match h.cholesky() {
                    Some(chol) => {
                        let trace = chol.inverse().trace();
                        gamma_eff = N_WEIGHTS as f64 - 2.0 * alpha * trace;
                    }
                    None => gamma_eff = N_WEIGHTS as f64,
                }
            }
            alpha = gamma_eff / (2.0 * ssw);
            beta = ((n_data - gamma_eff) / (2.0 * sse)).max(f64::MIN_POSITIVE);
        }
        self.objective = Objective::Bayes { alpha, beta };
        self.performance = self.objective.value(&self.jac.errors, &self.weights);
        self.bayes.push(BayesRecord {
            alpha,
            beta,
            gamma_eff,
            implied_ratio: beta * sse / (beta * sse + alpha * self.weights.sum_squares()),
            sse,
            ssw,
        });
    }

    /// Runs until `epochs` accepted steps or an earlier stop.
    pub fn run(&mut self, epochs: usize) -> StopReason {
        while self.steps.len() < epochs {
            match self.step() {
                StepOutcome::Accepted => {}
                StepOutcome::MuLimit => return StopReason::MuLimit,
                StepOutcome::Converged => return StopReason::Converged,
            }
        }
        StopReason::EpochLimit
    }

    pub fn finish(self, stop: StopReason) -> TrainResult {
        let final_mse = mse(&self.jac.errors);
        TrainResult {
            weights: self.weights,
            diagnostics: TrainDiagnostics {
                initial_performance: self.initial_performance,
                steps: self.steps,
                bayes: self.bayes,
                stop,
                final_performance: self.performance,
                final_mse,
            },
        }
    }
}

fn normal_equations(jac: &Jacobian) -> (Mat, Vect) {
    let mut jtj = Mat::zeros();
    let mut jte = Vect::zeros();
    for (row, e) in jac.rows.iter().zip(&jac.errors) {
        for i in 0..N_WEIGHTS {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            jte[i] += ri * e;
            for j in i..N_WEIGHTS {
                jtj[(i, j)] += ri * row[j];
            }
        }
    }
    for i in 0..N_WEIGHTS {
        for j in 0..i {
            jtj[(i, j)] = jtj[(j, i)];
        }
    }
    (jtj, jte)
}

/// Trains with the algorithm named in `cfg` for `cfg.epochs` epochs.
pub fn train(data: &[PredictionSample], init: MlpWeights, cfg: &TrainConfig) -> Result<TrainResult> {
    let mut t = Trainer::new(data, init, cfg)?;
    let stop = t.run(cfg.epochs);
    Ok(t.finish(stop))
}

/// Levenberg-Marquardt under `cfg.performance`, ignoring `cfg.algorithm`.
pub fn train_lm(data: &[PredictionSample], init: MlpWeights, cfg: &TrainConfig) -> Result<TrainResult> {
    let cfg = TrainConfig {
        algorithm: Algorithm::LevenbergMarquardt,
        ..cfg.clone()
    };
    train(data, init, &cfg)
}

/// Bayesian regularization, ignoring `cfg.algorithm` and `cfg.performance`.
pub fn train_bayes(data: &[PredictionSample], init: MlpWeights, cfg: &TrainConfig) -> Result<TrainResult> {
    let cfg = TrainConfig {
        algorithm: Algorithm::BayesianRegularization,
        ..cfg.clone()
    };
    train(data, init, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::make_dataset;

    fn ar2(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut noise = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut x = vec![0.0; n];
        for i in 2..n {
            x[i] = 0.9 * x[i - 1] - 0.2 * x[i - 2] + 0.1 * noise();
        }
        x
    }

    #[test]
    fn zero_problem_stays_put() {
        let data = make_dataset(&[0.0; 200]).unwrap();
        let r = train_lm(&data, MlpWeights::zeros(), &TrainConfig::default()).unwrap();
        assert_eq!(r.weights, MlpWeights::zeros());
        assert_eq!(r.diagnostics.final_mse, 0.0);
        assert_eq!(r.diagnostics.stop, StopReason::Converged);
    }

    #[test]
    fn lm_trace_is_monotone() {
        let data = make_dataset(&ar2(200, 5)).unwrap();
        for performance in [Performance::Mse, Performance::MseReg] {
            let cfg = TrainConfig {
                performance,
                epochs: 30,
                ..TrainConfig::default()
            };
            let r = train_lm(&data, MlpWeights::init_random(1, 0, 0), &cfg).unwrap();
            let trace = r.diagnostics.performance_trace();
            assert!(trace.windows(2).all(|p| p[1] <= p[0]), "{trace:?}");
        }
    }

    #[test]
    fn bayes_records_each_accepted_step() {
        let data = make_dataset(&ar2(200, 9)).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let r = train_bayes(&data, MlpWeights::init_random(2, 0, 0), &cfg).unwrap();
        assert_eq!(r.diagnostics.bayes.len(), r.diagnostics.epochs_run());
        for b in &r.diagnostics.bayes {
            assert!(b.gamma_eff > 0.0 && b.gamma_eff < N_WEIGHTS as f64, "{b:?}");
        }
        for s in &r.diagnostics.steps {
            assert!(s.after < s.before);
        }
    }

    #[test]
    fn rejects_empty_data() {
        assert!(train_lm(&[], MlpWeights::zeros(), &TrainConfig::default()).is_err());
    }
}
