//! The SEGSNR experiment grid.
//!
//! Rows are predictor/training configurations (the two LPC baselines and
//! the 27 MLP training regimes), columns are bit depths 2..=5, and every
//! cell is evaluated on every corpus file.
//!
//! CSV schema, version 1. Comment lines start with `#`; the first one names
//! the build, schema, format version and seed. Then a header and one line
//! per (row, bits, file) followed by a pooled `ALL` line for each
//! (row, bits):
//!
//! ```text
//! row_label,n_bits,segsnr_db,std_db,file,frames,seed,config_hash,bitstream_crc,status
//! ```
//!
//! `ALL` lines pool the per-frame SNRs of every successful file, so they can
//! be recomputed from the per-file `segsnr_db`, `std_db` and `frames`. The
//! last line, labelled `#checksum`, carries the sum of all per-file
//! `segsnr_db` values and the CRC-32 of every preceding data line.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::codec::{encode, CodecConfig, PredictorConfig};
use crate::error::{Error, Result};
use crate::training::{Algorithm, Fusion, Performance, Selection, TrainConfig};

use super::corpus::CorpusEntry;

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const ALL_FILES: &str = "ALL";
pub const CHECKSUM_LABEL: &str = "#checksum";

pub const CSV_HEADER: [&str; 10] = [
    "row_label",
    "n_bits",
    "segsnr_db",
    "std_db",
    "file",
    "frames",
    "seed",
    "config_hash",
    "bitstream_crc",
    "status",
];

/// Build identifier written to every output file.
pub fn build_id() -> String {
    format!(
        "nladpcm {} format={}",
        env!("CARGO_PKG_VERSION"),
        crate::codec::FORMAT_VERSION
    )
}

/// One grid row: a label and the predictor it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub label: String,
    pub predictor: PredictorConfig,
}

impl GridRow {
    pub fn lpc(order: usize) -> Self {
        Self {
            label: format!("LPC-{order}"),
            predictor: PredictorConfig::Lpc { order },
        }
    }

    /// Row for an MLP regime, labelled like `B-R V Cmedian msereg 50`.
    pub fn mlp(train: TrainConfig) -> Self {
        let mut parts = vec![match train.algorithm {
            Algorithm::LevenbergMarquardt => "L-M",
            Algorithm::BayesianRegularization => "B-R",
        }];
        if train.validation {
            parts.push("V");
        }
        match train.selection {
            Selection::BestTrain => {}
            Selection::Committee(Fusion::Mean) => parts.push("Cmean"),
            Selection::Committee(Fusion::Median) => parts.push("Cmedian"),
        }
        parts.push(match train.performance {
            Performance::Mse => "mse",
            Performance::MseReg => "msereg",
        });
        let label = format!("{} {}", parts.join(" "), train.epochs);
        Self {
            label,
            predictor: PredictorConfig::Mlp(train),
        }
    }
}

/// The two LPC baselines: order 10 and order 25.
pub fn lpc_rows() -> Vec<GridRow> {
    vec![GridRow::lpc(10), GridRow::lpc(25)]
}

/// The 27 MLP training regimes, in table order.
pub fn mlp_rows() -> Vec<GridRow> {
    use Algorithm::*;
    use Performance::*;
    let selections = [
        Selection::BestTrain,
        Selection::Committee(Fusion::Mean),
        Selection::Committee(Fusion::Median),
    ];
    let blocks: [(Algorithm, Performance, usize, bool); 9] = [
        (LevenbergMarquardt, Mse, 6, false),
        (LevenbergMarquardt, Mse, 50, false),
        (LevenbergMarquardt, MseReg, 6, false),
        (LevenbergMarquardt, MseReg, 50, false),
        (BayesianRegularization, MseReg, 6, false),
        (BayesianRegularization, MseReg, 50, false),
        (LevenbergMarquardt, Mse, 50, true),
        (LevenbergMarquardt, MseReg, 50, true),
        (BayesianRegularization, MseReg, 50, true),
    ];
    blocks
        .iter()
        .flat_map(|&(algorithm, performance, epochs, validation)| {
            selections.iter().map(move |&selection| {
                GridRow::mlp(TrainConfig {
                    algorithm,
                    performance,
                    epochs,
                    validation,
                    selection,
                    ..TrainConfig::default()
                })
            })
        })
        .collect()
}

/// LPC baselines followed by the MLP regimes (29 rows).
pub fn default_rows() -> Vec<GridRow> {
    let mut rows = lpc_rows();
    rows.extend(mlp_rows());
    rows
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub corpus: Vec<CorpusEntry>,
    pub rows: Vec<GridRow>,
    pub n_bits: Vec<u8>,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn new(corpus: Vec<CorpusEntry>, seed: u64) -> Self {
        Self {
            corpus,
            rows: default_rows(),
            n_bits: vec![2, 3, 4, 5],
            seed,
        }
    }

    pub fn config(&self, row: &GridRow, n_bits: u8) -> Result<CodecConfig> {
        Ok(CodecConfig::new(row.predictor.clone(), n_bits)?.with_seed(self.seed))
    }
}

/// One (row, bits, file) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FileCell {
    pub row_label: String,
    pub n_bits: u8,
    pub file: String,
    pub segsnr_db: f64,
    pub std_db: f64,
    pub frames: usize,
    pub config_hash: String,
    pub bitstream_crc: String,
    /// `None` on success, otherwise the failure message.
    pub error: Option<String>,
    /// Serialized bitstream; empty for cells restored from a CSV.
    pub bitstream: Vec<u8>,
    /// Every `gamma_eff` recorded while encoding (Bayesian rows only).
    pub gamma_eff: Vec<f64>,
    pub per_frame_snr_db: Vec<f64>,
    pub restored: bool,
}

/// Pooled statistics of one (row, bits) column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub segsnr_db: f64,
    pub std_db: f64,
    pub frames: usize,
}

/// Pools per-file (mean, std, frames) triples into corpus-level statistics.
pub fn pool(cells: impl IntoIterator<Item = (f64, f64, usize)>) -> Aggregate {
    let mut frames = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (m, s, f) in cells {
        if f == 0 {
            continue;
        }
        frames += f;
        sum += m * f as f64;
        sum_sq += (s * s + m * m) * f as f64;
    }
    if frames == 0 {
        return Aggregate {
            segsnr_db: f64::NAN,
            std_db: f64::NAN,
            frames: 0,
        };
    }
    let mean = sum / frames as f64;
    let var = (sum_sq / frames as f64 - mean * mean).max(0.0);
    Aggregate {
        segsnr_db: mean,
        std_db: var.sqrt(),
        frames,
    }
}

#[derive(Debug, Clone)]
pub struct ResultRow {
    pub label: String,
    /// Pooled result per bit depth, in grid column order.
    pub columns: Vec<(u8, Aggregate)>,
    pub files: Vec<FileCell>,
    pub wall_clock: Duration,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub rows: Vec<ResultRow>,
    pub csv: String,
    /// Cells computed in this run (restored cells excluded).
    pub computed: usize,
}

impl GridResult {
    pub fn row(&self, label: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn aggregate(&self, label: &str, n_bits: u8) -> Option<Aggregate> {
        self.row(label)?
            .columns
            .iter()
            .find(|(b, _)| *b == n_bits)
            .map(|(_, a)| *a)
    }

    pub fn cells(&self) -> impl Iterator<Item = &FileCell> {
        self.rows.iter().flat_map(|r| r.files.iter())
    }
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

fn run_cell(grid: &ExperimentGrid, row: &GridRow, n_bits: u8, entry: &CorpusEntry) -> FileCell {
    let mut cell = FileCell {
        row_label: row.label.clone(),
        n_bits,
        file: entry.name.clone(),
        segsnr_db: f64::NAN,
        std_db: f64::NAN,
        frames: 0,
        config_hash: String::new(),
        bitstream_crc: String::new(),
        error: None,
        bitstream: Vec::new(),
        gamma_eff: Vec::new(),
        per_frame_snr_db: Vec::new(),
        restored: false,
    };
    let cfg = match grid.config(row, n_bits) {
        Ok(c) => c,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    cell.config_hash = cfg.config_hash();
    match encode(&entry.signal, &cfg) {
        Ok(out) => {
            let bytes = out.bitstream.to_bytes();
            cell.bitstream_crc = format!("{:08x}", crc32fast::hash(&bytes));
            cell.bitstream = bytes;
            cell.segsnr_db = out.report.segsnr_db;
            cell.std_db = out.report.std_db;
            cell.frames = out.report.frames_counted;
            cell.per_frame_snr_db = out.report.per_frame_snr_db;
            cell.gamma_eff = out
                .frames
                .iter()
                .flat_map(|f| f.gamma_eff.iter().flatten().copied())
                .collect();
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

type CellKey = (String, u8, String);

/// Parses the per-file lines of a previous grid CSV, keyed by
/// `(row_label, n_bits, file)`. Failed cells are not restored.
pub fn parse_cells(csv_text: &str) -> Result<BTreeMap<CellKey, FileCell>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Config(format!("grid csv: {e}")))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!("grid csv: expected {} fields", CSV_HEADER.len())));
        }
        let file = &rec[4];
        if file == ALL_FILES || &rec[9] != "ok" {
            continue;
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("grid csv field {}: {e}", CSV_HEADER[i])))
        };
        let n_bits: u8 = rec[1]
            .parse()
            .map_err(|e| Error::Config(format!("grid csv n_bits: {e}")))?;
        let cell = FileCell {
            row_label: rec[0].to_string(),
            n_bits,
            file: file.to_string(),
            segsnr_db: num(2)?,
            std_db: num(3)?,
            frames: rec[5]
                .parse()
                .map_err(|e| Error::Config(format!("grid csv frames: {e}")))?,
            config_hash: rec[7].to_string(),
            bitstream_crc: rec[8].to_string(),
            error: None,
            bitstream: Vec::new(),
            gamma_eff: Vec::new(),
            per_frame_snr_db: Vec::new(),
            restored: true,
        };
        out.insert((cell.row_label.clone(), n_bits, cell.file.clone()), cell);
    }
    Ok(out)
}

/// Runs every cell of `grid`.
pub fn run_grid(grid: &ExperimentGrid) -> Result<GridResult> {
    run_grid_resuming(grid, None)
}

/// Runs the cells of `grid` that `previous` (an earlier CSV) lacks and
/// assembles the complete CSV.
pub fn run_grid_resuming(grid: &ExperimentGrid, previous: Option<&str>) -> Result<GridResult> {
    if grid.corpus.is_empty() {
        return Err(Error::Precondition("grid corpus is empty".into()));
    }
    let mut restored = match previous {
        Some(text) => parse_cells(text)?,
        None => BTreeMap::new(),
    };
    let mut corpus: Vec<&CorpusEntry> = grid.corpus.iter().collect();
    corpus.sort_by(|a, b| a.name.cmp(&b.name));

    let mut rows = Vec::with_capacity(grid.rows.len());
    let mut computed = 0;
    for row in &grid.rows {
        let started = Instant::now();
        let mut files = Vec::new();
        let mut columns = Vec::new();
        for &n_bits in &grid.n_bits {
            let mut col = Vec::with_capacity(corpus.len());
            for entry in &corpus {
                let key = (row.label.clone(), n_bits, entry.name.clone());
                let cell = match restored.remove(&key) {
                    Some(c) => c,
                    None => {
                        computed += 1;
                        run_cell(grid, row, n_bits, entry)
                    }
                };
                col.push(cell);
            }
            let agg = pool(
                col.iter()
                    .filter(|c| c.error.is_none())
                    .map(|c| (c.segsnr_db, c.std_db, c.frames)),
            );
            columns.push((n_bits, agg));
            files.extend(col);
        }
        rows.push(ResultRow {
            label: row.label.clone(),
            columns,
            files,
            wall_clock: started.elapsed(),
        });
    }
    let csv = render_csv(grid, &rows)?;
    Ok(GridResult {
        rows,
        csv,
        computed,
    })
}

fn render_csv(grid: &ExperimentGrid, rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv write: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let seed = grid.seed.to_string();
    let mut checksum_sum = 0.0;
    for row in rows {
        for (n_bits, agg) in &row.columns {
            let mut hash = String::new();
            for c in row.files.iter().filter(|c| c.n_bits == *n_bits) {
                if hash.is_empty() {
                    hash = c.config_hash.clone();
                }
                if c.error.is_none() {
                    checksum_sum += c.segsnr_db;
                }
                let status = c.error.clone().unwrap_or_else(|| "ok".into());
                w.write_record([
                    c.row_label.as_str(),
                    &n_bits.to_string(),
                    &fmt_f(c.segsnr_db),
                    &fmt_f(c.std_db),
                    &c.file,
                    &c.frames.to_string(),
                    &seed,
                    &c.config_hash,
                    &c.bitstream_crc,
                    &status,
                ])
                .map_err(csv_err)?;
            }
            w.write_record([
                row.label.as_str(),
                &n_bits.to_string(),
                &fmt_f(agg.segsnr_db),
                &fmt_f(agg.std_db),
                ALL_FILES,
                &agg.frames.to_string(),
                &seed,
                &hash,
                "",
                "ok",
            ])
            .map_err(csv_err)?;
        }
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
        .expect("csv output is utf-8");
    let crc = format!("{:08x}", crc32fast::hash(body.as_bytes()));
    let mut tail = csv::Writer::from_writer(Vec::new());
    tail.write_record([
        CHECKSUM_LABEL,
        "",
        &fmt_f(checksum_sum),
        "",
        "",
        "",
        &seed,
        &crc,
        "",
        "ok",
    ])
    .map_err(csv_err)?;
    let tail = String::from_utf8(tail.into_inner().map_err(|e| Error::Config(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(format!(
        "# {} csv-schema={} seed={}\n{body}{tail}",
        build_id(),
        CSV_SCHEMA_VERSION,
        grid.seed
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_catalogue() {
        let rows = default_rows();
        assert_eq!(rows.len(), 29);
        assert_eq!(rows[0].label, "LPC-10");
        assert_eq!(rows[1].label, "LPC-25");
        assert_eq!(rows[2].label, "L-M mse 6");
        assert_eq!(rows[4].label, "L-M Cmedian mse 6");
        assert_eq!(rows[28].label, "B-R V Cmedian msereg 50");
        let mut labels: Vec<_> = rows.iter().map(|r| r.label.clone()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 29);
    }

    #[test]
    fn pooling_matches_direct() {
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 12.0];
        let (ma, sa) = crate::dsp::mean_std(&a);
        let (mb, sb) = crate::dsp::mean_std(&b);
        let all: Vec<f64> = a.iter().chain(&b).copied().collect();
        let (m, s) = crate::dsp::mean_std(&all);
        let p = pool([(ma, sa, 3), (mb, sb, 2)]);
        assert!((p.segsnr_db - m).abs() < 1e-12);
        assert!((p.std_db - s).abs() < 1e-12);
        assert_eq!(p.frames, 5);
        assert!(pool([]).segsnr_db.is_nan());
    }
}
