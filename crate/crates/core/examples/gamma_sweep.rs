//! SEGSNR against the msereg performance ratio at 6 and 50 epochs.

use nladpcm::harness::sweep::default_gammas;
use nladpcm::harness::{desk_corpus, gamma_sweep};
use nladpcm::training::TrainConfig;

fn main() -> nladpcm::Result<()> {
    let x = desk_corpus(1, 2000, 3).remove(0).signal;
    let res = gamma_sweep(&x, &default_gammas(), &[6, 50], 2, 0, &TrainConfig::default())?;
    print!("{}", res.csv);
    Ok(())
}
