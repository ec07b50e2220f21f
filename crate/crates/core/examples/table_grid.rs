//! A reduced experiment grid: LPC baselines and the plain L-M rows on a
//! small synthetic corpus. Pass `all` to run every row.

use nladpcm::harness::grid::{default_rows, lpc_rows, mlp_rows};
use nladpcm::harness::{desk_corpus, run_grid, ExperimentGrid};

fn main() -> nladpcm::Result<()> {
    let full = std::env::args().nth(1).as_deref() == Some("all");
    let mut grid = ExperimentGrid::new(desk_corpus(3, 1200, 1), 1);
    if !full {
        grid.rows = lpc_rows();
        grid.rows.extend(mlp_rows().into_iter().take(3));
    } else {
        grid.rows = default_rows();
    }
    let res = run_grid(&grid)?;
    for row in &res.rows {
        print!("{:<26}", row.label);
        for (bits, agg) in &row.columns {
            print!(" Nq={bits} {:6.2} ({:5.2})", agg.segsnr_db, agg.std_db);
        }
        println!("  [{:.1} s]", row.wall_clock.as_secs_f64());
    }
    Ok(())
}
