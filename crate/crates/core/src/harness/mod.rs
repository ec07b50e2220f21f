//! Experiment harness: audio I/O, synthetic corpus, the experiment grid
//! and the performance-ratio sweep.

pub mod cli;
pub mod corpus;
pub mod grid;
pub mod sweep;
pub mod wav;

pub use corpus::{desk_corpus, synthesize, CorpusEntry, SyntheticKind};
pub use grid::{run_grid, run_grid_resuming, ExperimentGrid, GridResult, GridRow};
pub use sweep::{gamma_sweep, SweepResult};
pub use wav::{read_wav, write_wav};
