//! Command-line front end (`nlad`).
//!
//! Exit codes: 0 success, 2 usage or configuration conflict, 3 unreadable
//! or malformed file, 4 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codec::{
    decode, encode, forward_unquantized_mode, Adaptation, Bitstream, CodecConfig, PredictorConfig,
};
use crate::dsp::{segsnr, SegSnrReport, Signal};
use crate::error::Error;
use crate::mlp::Activation;
use crate::training::{parse_selection, Algorithm, Performance, TrainConfig};

use super::corpus::{desk_corpus, read_manifest, CorpusEntry, CORPUS_ENV};
use super::grid::{build_id, default_rows, lpc_rows, mlp_rows, run_grid_resuming, ExperimentGrid};
use super::sweep::{default_gammas, gamma_sweep};
use super::wav::{pcm16_roundtrip, read_wav, write_wav};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FORMAT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }
    fn format(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_FORMAT,
            message: m.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "nlad", version, about = "ADPCM speech coding with LPC and neural predictors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a 16-bit mono WAV file into a bitstream.
    Encode {
        input: PathBuf,
        /// Bitstream output path (omit with --forward).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the encoder's reconstruction as WAV.
        #[arg(long)]
        recon: Option<PathBuf>,
        /// Write a per-frame SEGSNR report (CSV).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Forward-unquantized diagnostic mode: no bitstream is produced.
        #[arg(long)]
        forward: bool,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Decode a bitstream into a WAV file.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Segmental SNR of a reconstruction against the original.
    Eval {
        original: PathBuf,
        reconstructed: PathBuf,
        #[arg(long, default_value_t = 200)]
        frame_len: usize,
        /// Print per-frame values as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run the SEGSNR experiment grid.
    Grid {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Rows to run.
        #[arg(long, value_enum, default_value_t = RowSet::All)]
        rows: RowSet,
        /// Bit depths (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u8, 3, 4, 5])]
        bits: Vec<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Previous CSV; only cells missing from it are recomputed.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// SEGSNR versus msereg performance ratio.
    Sweep {
        /// Input WAV; a synthetic signal is used when omitted.
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![6usize, 50])]
        epochs: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        bits: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowSet {
    All,
    Lpc,
    Mlp,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Manifest of WAV files (one path per line).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Root directory for manifest entries.
    #[arg(long, env = CORPUS_ENV)]
    pub corpus_root: Option<PathBuf>,
    /// Use N synthetic desk-corpus signals instead of a manifest.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Length of each synthetic signal in samples.
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Lm,
    Br,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerformanceArg {
    Mse,
    Msereg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Tanh,
    Logistic,
}

/// Flags mirroring the codec configuration.
#[derive(Debug, Args, Clone)]
pub struct CodecArgs {
    /// Bits per sample (2..=5).
    #[arg(short = 'b', long, default_value_t = 4)]
    pub bits: u8,
    #[arg(long, default_value_t = 200)]
    pub frame_len: usize,
    /// `lpc10`, `lpc25`, `lpc:<order>` or `mlp`.
    #[arg(long, default_value = "lpc10")]
    pub predictor: String,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Lm)]
    pub algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value_t = PerformanceArg::Mse)]
    pub performance: PerformanceArg,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long, default_value_t = 6)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// `best`, `cmean` or `cmedian`.
    #[arg(long, default_value = "best")]
    pub selection: String,
    /// Early stopping on the previous frame.
    #[arg(long)]
    pub validation: bool,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    #[arg(long, value_enum, default_value_t = ActivationArg::Tanh)]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restart the quantizer step at every frame.
    #[arg(long)]
    pub reset_quantizer: bool,
}

impl CodecArgs {
    pub fn to_config(&self) -> CliResult<CodecConfig> {
        let mlp_only = self.validation
            || self.algorithm != AlgorithmArg::Lm
            || self.performance != PerformanceArg::Mse
            || self.selection != "best";
        let predictor = match self.predictor.as_str() {
            "mlp" => {
                let train = TrainConfig {
                    algorithm: match self.algorithm {
                        AlgorithmArg::Lm => Algorithm::LevenbergMarquardt,
                        AlgorithmArg::Br => Algorithm::BayesianRegularization,
                    },
                    performance: match self.performance {
                        PerformanceArg::Mse => Performance::Mse,
                        PerformanceArg::Msereg => Performance::MseReg,
                    },
                    gamma: self.gamma,
                    epochs: self.epochs,
                    n_starts: self.starts,
                    selection: parse_selection(&self.selection)?,
                    validation: self.validation,
                    patience: self.patience,
                    activation: match self.activation {
                        ActivationArg::Tanh => Activation::Tanh,
                        ActivationArg::Logistic => Activation::Logistic,
                    },
                    ..TrainConfig::default()
                };
                PredictorConfig::Mlp(train)
            }
            lpc => {
                let order = match lpc {
                    "lpc10" => 10,
                    "lpc25" => 25,
                    other => other
                        .strip_prefix("lpc:")
                        .and_then(|o| o.parse().ok())
                        .ok_or_else(|| CliError::usage(format!("unknown predictor {other:?}")))?,
                };
                if mlp_only {
                    return Err(CliError::usage(
                        "training flags (--algorithm, --performance, --selection, --validation) need --predictor mlp",
                    ));
                }
                PredictorConfig::Lpc { order }
            }
        };
        let mut cfg = CodecConfig::new(predictor, self.bits)?.with_seed(self.seed);
        cfg.frame_len = self.frame_len;
        cfg.reset_quantizer_per_frame = self.reset_quantizer;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_input(path: &Path) -> CliResult<Signal> {
    read_wav(path).map_err(|e| CliError::format(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

/// Human-readable summary; SEGSNR printed with round-trip precision.
pub fn summary(report: &SegSnrReport) -> String {
    format!(
        "segsnr_db={:?}\nstd_db={:?}\nframes={}\nsilent_frames={}\ntail_samples={}\n",
        report.segsnr_db, report.std_db, report.frames_counted, report.silent_frames, report.tail_len
    )
}

fn report_csv(report: &SegSnrReport, header: &str) -> String {
    let mut s = format!("# {header}\nframe,snr_db\n");
    for (i, v) in report.per_frame_snr_db.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:?}");
    }
    let _ = writeln!(s, "mean,{:?}", report.segsnr_db);
    let _ = writeln!(s, "std,{:?}", report.std_db);
    s
}

fn load_corpus(args: &CorpusArgs, seed: u64) -> CliResult<Vec<CorpusEntry>> {
    match (&args.manifest, args.synthetic) {
        (Some(_), Some(_)) => Err(CliError::usage("--manifest and --synthetic are exclusive")),
        (None, None) => Err(CliError::usage("need --manifest or --synthetic")),
        (None, Some(n)) => Ok(desk_corpus(n, args.samples, seed)),
        (Some(m), None) => {
            let files = read_manifest(m, args.corpus_root.as_deref()).map_err(|e| CliError::format(e.to_string()))?;
            files
                .iter()
                .map(|p| {
                    Ok(CorpusEntry {
                        name: p.display().to_string(),
                        signal: read_input(p)?,
                    })
                })
                .collect()
        }
    }
}

/// Runs one parsed command, returning what it printed.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Encode {
            input,
            output,
            recon,
            report,
            forward,
            codec,
        } => {
            let mut cfg = codec.to_config()?;
            let signal = read_input(&input)?;
            let header = format!("{} seed={} config_hash={}", build_id(), cfg.rng_seed, cfg.config_hash());
            let (reconstruction, float_report) = if forward {
                if output.is_some() {
                    return Err(CliError::usage("--forward produces no bitstream; drop --output"));
                }
                cfg = cfg.with_adaptation(Adaptation::ForwardUnquantized);
                let out = forward_unquantized_mode(&signal, &cfg)?;
                (out.reconstruction, out.report)
            } else {
                let path = output.ok_or_else(|| CliError::usage("--output is required"))?;
                let out = encode(&signal, &cfg)?;
                write_file(&path, &out.bitstream.to_bytes())?;
                (out.reconstruction, out.report)
            };
            // What a decoder writes to disk is the 16-bit version.
            let pcm = pcm16_roundtrip(&reconstruction.samples);
            let rep = segsnr(&signal.samples, &pcm, cfg.frame_len)?;
            if let Some(p) = recon {
                write_wav(&p, &reconstruction).map_err(|e| CliError::format(e.to_string()))?;
            }
            if let Some(p) = report {
                write_file(&p, report_csv(&rep, &header).as_bytes())?;
            }
            Ok(format!(
                "# {header}\n{}float_segsnr_db={:?}\n",
                summary(&rep),
                float_report.segsnr_db
            ))
        }
        Command::Decode { input, output } => {
            let bytes = std::fs::read(&input).map_err(|e| CliError::format(format!("{}: {e}", input.display())))?;
            let bs = Bitstream::from_bytes(&bytes).map_err(|e| CliError::format(e.to_string()))?;
            let signal = decode(&bs)?;
            write_wav(&output, &signal).map_err(|e| CliError::format(e.to_string()))?;
            Ok(format!(
                "# {} seed={} config_hash={}\nsamples={}\n",
                build_id(),
                bs.config.rng_seed,
                bs.config.config_hash(),
                signal.len()
            ))
        }
        Command::Eval {
            original,
            reconstructed,
            frame_len,
            csv,
        } => {
            let a = read_input(&original)?;
            let b = read_input(&reconstructed)?;
            let rep = segsnr(&a.samples, &b.samples, frame_len)?;
            let header = build_id();
            Ok(if csv {
                report_csv(&rep, &header)
            } else {
                format!("# {header}\n{}", summary(&rep))
            })
        }
        Command::Grid {
            corpus,
            rows,
            bits,
            seed,
            resume,
            output,
        } => {
            let entries = load_corpus(&corpus, seed)?;
            let mut grid = ExperimentGrid::new(entries, seed);
            grid.rows = match rows {
                RowSet::All => default_rows(),
                RowSet::Lpc => lpc_rows(),
                RowSet::Mlp => mlp_rows(),
            };
            grid.n_bits = bits;
            let previous = match resume {
                Some(p) => Some(std::fs::read_to_string(&p).map_err(|e| CliError::format(format!("{}: {e}", p.display())))?),
                None => None,
            };
            let result = run_grid_resuming(&grid, previous.as_deref())?;
            write_file(&output, result.csv.as_bytes())?;
            let mut s = String::new();
            for row in &result.rows {
                let _ = write!(s, "{:28}", row.label);
                for (b, agg) in &row.columns {
                    let _ = write!(s, "  Nq={b} {:6.2} ({:5.2})", agg.segsnr_db, agg.std_db);
                }
                s.push('\n');
            }
            Ok(s)
        }
        Command::Sweep {
            input,
            gammas,
            epochs,
            bits,
            seed,
            output,
        } => {
            let signal = match input {
                Some(p) => read_input(&p)?,
                None => desk_corpus(1, 4000, seed).remove(0).signal,
            };
            let gammas = gammas.unwrap_or_else(default_gammas);
            let result = gamma_sweep(&signal, &gammas, &epochs, bits, seed, &TrainConfig::default())?;
            write_file(&output, result.csv.as_bytes())?;
            Ok(result.csv)
        }
    }
}

/// Parses `args` and runs the command; returns `(exit code, stdout, stderr)`.
pub fn main_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, String::new(), e.to_string());
        }
    };
    match run(cli) {
        Ok(out) => (EXIT_OK, out, String::new()),
        Err(e) => (e.code, String::new(), format!("error: {}\n", e.message)),
    }
}
