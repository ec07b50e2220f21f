//! Trains the 10-2-1 predictor on one frame with LM, msereg and Bayesian
//! regularization and compares them with the order-10 LPC fit.

use nladpcm::dsp::{autocorrelation, levinson_durbin};
use nladpcm::harness::{synthesize, SyntheticKind};
use nladpcm::mlp::MlpWeights;
use nladpcm::training::{make_dataset, train, Algorithm, Performance, TrainConfig};

fn main() -> nladpcm::Result<()> {
    let x = synthesize(SyntheticKind::NonlinearAr, 800, 2);
    let frame = &x.samples[400..600];
    let data = make_dataset(frame)?;
    let lpc = levinson_durbin(&autocorrelation(frame, 10)?, 10)?;
    println!("LPC-10 residual energy per sample: {:.3e}", lpc.residual_energy / frame.len() as f64);
    let regimes = [
        ("L-M mse", Algorithm::LevenbergMarquardt, Performance::Mse),
        ("L-M msereg", Algorithm::LevenbergMarquardt, Performance::MseReg),
        ("B-R msereg", Algorithm::BayesianRegularization, Performance::MseReg),
    ];
    for (name, algorithm, performance) in regimes {
        for epochs in [6, 50] {
            let cfg = TrainConfig {
                algorithm,
                performance,
                epochs,
                ..TrainConfig::default()
            };
            let res = train(&data, MlpWeights::init_random(0, 0, 0), &cfg)?;
            let d = &res.diagnostics;
            let gamma_eff = d.bayes.last().map(|b| format!(" gamma_eff {:.2}", b.gamma_eff)).unwrap_or_default();
            println!(
                "{name:<11} {epochs:>2} epochs: mse {:.3e} |w|^2 {:.2} ({:?}){gamma_eff}",
                d.final_mse,
                res.weights.sum_squares(),
                d.stop
            );
        }
    }
    Ok(())
}
