//! Five random starts on one frame: best-of, mean and median committees.

use nladpcm::harness::{synthesize, SyntheticKind};
use nladpcm::training::{dataset_mse, make_dataset, multi_start, Fusion, Selection, TrainConfig};

fn main() -> nladpcm::Result<()> {
    let x = synthesize(SyntheticKind::SpeechLike, 1000, 11);
    let train_frame = &x.samples[400..600];
    let test_frame = &x.samples[600..800];
    let data = make_dataset(train_frame)?;
    let test = make_dataset(test_frame)?;
    for selection in [
        Selection::BestTrain,
        Selection::Committee(Fusion::Mean),
        Selection::Committee(Fusion::Median),
    ] {
        let cfg = TrainConfig {
            selection,
            epochs: 50,
            ..TrainConfig::default()
        };
        let p = multi_start(&data, None, &cfg, 3, 0)?;
        let test_mse = test.iter().map(|s| (s.target - p.predict(&s.input)).powi(2)).sum::<f64>() / test.len() as f64;
        let train_mse: Vec<String> = p
            .starts
            .iter()
            .map(|s| format!("{:.2e}", dataset_mse(&s.weights, cfg.activation, &data)))
            .collect();
        println!("{selection:?}: next-frame mse {test_mse:.3e}; starts [{}]", train_mse.join(", "));
    }
    Ok(())
}
