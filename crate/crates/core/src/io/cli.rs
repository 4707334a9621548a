//! `groupreduce` command line tool.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use super::{
    ablation_csv, curve_csv, load_model, read_frequencies, read_frequency_file, read_matrix,
    save_model, spectrum_csv, write_atomic, write_frequency_file, write_matrix, zipf_csv, Dtype,
    StoredModel,
};
use crate::baselines::{
    dequantize, lowrank_baseline, prune_to_budget, quantize_model, quantize_uniform,
};
use crate::compressor::{
    default_cluster_count, group_reduce_traced, FrequencyTable, RankSpec, RefineConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{
    ablation_run, error_curve, gen_zipf_embedding, spectrum, zipf_stats, MemoryFootprint,
    MemoryReport,
};
use crate::numlin::{frobenius_error, Matrix};

#[derive(Debug, Parser)]
#[command(
    name = "groupreduce",
    version,
    about = "Frequency-weighted block low-rank compression of embedding matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a matrix with frequency-weighted block low-rank approximation.
    Compress(CompressArgs),
    /// Quantize the factors of a compressed model.
    Quantize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        bits: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report errors and memory of a compressed model against the original.
    Evaluate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        freq: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Print one reconstructed row or write the full reconstruction.
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "out", required_unless_present = "out")]
        row: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["f32", "f64"], default_value = "f32")]
        dtype: String,
    },
    /// Compare the five strategy variants at a matched budget.
    Ablate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        freq: PathBuf,
        #[arg(long)]
        clusters: Option<usize>,
        /// Parameter budget as a fraction of the dense parameter count.
        #[arg(long)]
        budget: f64,
        #[command(flatten)]
        refine: RefineArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Singular values of a matrix as CSV.
    Spectrum {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relative truncated-SVD error at the given ranks as CSV.
    Curve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank / log-frequency pairs of a frequency file as CSV.
    Zipf {
        #[arg(long)]
        freq: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one baseline compressor.
    Baseline(BaselineArgs),
    /// Write a synthetic Zipfian instance.
    Generate {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        matrix_out: PathBuf,
        #[arg(long)]
        freq_out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RefineArgs {
    /// Maximum refinement rounds.
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Fraction of candidates moved per round.
    #[arg(long, default_value_t = 0.10)]
    move_frac: f64,
    /// Stop when fewer tokens than this want to move [default: max(1, ceil(N/1000))].
    #[arg(long)]
    min_moves: Option<usize>,
}

impl RefineArgs {
    fn config(&self, tokens: usize) -> RefineConfig {
        let mut cfg = RefineConfig::for_tokens(tokens);
        cfg.max_iters = self.iters;
        cfg.move_frac = self.move_frac;
        if let Some(m) = self.min_moves {
            cfg.min_candidates = m;
        }
        cfg
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("ranks").required(true).args(["budget", "base_rank"])))]
struct CompressArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    freq: PathBuf,
    /// Number of clusters [default: 5 up to 50k rows, else 20].
    #[arg(long)]
    clusters: Option<usize>,
    /// Parameter budget as a fraction of the dense parameter count.
    #[arg(long)]
    budget: Option<f64>,
    /// Rank of the least frequent cluster.
    #[arg(long)]
    base_rank: Option<usize>,
    #[command(flatten)]
    refine: RefineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("method").required(true).args(["svd", "prune_budget", "quant_bits"])))]
struct BaselineArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Optional frequencies for a weighted error line.
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Plain truncated SVD at this rank.
    #[arg(long)]
    svd: Option<usize>,
    /// Magnitude pruning to this fraction of the dense parameter count.
    #[arg(long)]
    prune_budget: Option<f64>,
    /// Uniform quantization of the whole matrix.
    #[arg(long)]
    quant_bits: Option<u32>,
}

fn budget_params(fraction: f64, rows: usize, cols: usize) -> Result<u64> {
    if !(fraction.is_finite() && fraction > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "budget fraction {fraction} must be positive"
        )));
    }
    Ok((fraction * (rows * cols) as f64).floor() as u64)
}

fn load_inputs(matrix: &Path, freq: &Path) -> Result<(Matrix, FrequencyTable)> {
    let a = read_matrix(matrix)?;
    let q = read_frequencies(freq, a.rows())?;
    Ok((a, q))
}

fn print_report(out: &mut dyn Write, report: &MemoryReport) -> Result<()> {
    writeln!(out, "{report}")?;
    Ok(())
}

fn weighted_error(a: &Matrix, q: &FrequencyTable, approx: &Matrix) -> f64 {
    a.iter_rows()
        .zip(approx.iter_rows())
        .enumerate()
        .map(|(i, (x, y))| q.get(i) * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum()
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Compress(args) => {
            let (a, q) = load_inputs(&args.matrix, &args.freq)?;
            let clusters = args
                .clusters
                .unwrap_or_else(|| default_cluster_count(a.rows()));
            let spec = match (args.budget, args.base_rank) {
                (Some(f), _) => RankSpec::Budget(budget_params(f, a.rows(), a.cols())?),
                (None, Some(r)) => RankSpec::BaseRank(r),
                (None, None) => unreachable!("clap requires one of --budget/--base-rank"),
            };
            let cfg = args.refine.config(a.rows());
            let (model, summary) = group_reduce_traced(&a, &q, clusters, spec, &cfg)?;
            print_report(out, &model.memory_footprint())?;
            writeln!(out, "ranks:             {:?}", model.partition().ranks())?;
            writeln!(out, "refine rounds:     {}", summary.iterations)?;
            writeln!(out, "tokens moved:      {}", summary.total_moves)?;
            writeln!(out, "objective:         {}", summary.final_objective)?;
            if let Some(path) = args.out {
                save_model(&path, &StoredModel::Plain(model))?;
            }
        }
        Command::Quantize {
            model,
            bits,
            out: path,
        } => {
            let stored = load_model(&model)?;
            let plain = match stored {
                StoredModel::Plain(m) => m,
                StoredModel::Quantized(_) => {
                    return Err(Error::InvalidConfig("model is already quantized".into()))
                }
            };
            let q = quantize_model(&plain, bits)?;
            print_report(out, &q.memory_footprint())?;
            save_model(&path, &StoredModel::Quantized(q))?;
        }
        Command::Evaluate {
            matrix,
            freq,
            model,
        } => {
            let (a, q) = load_inputs(&matrix, &freq)?;
            let stored = load_model(&model)?;
            let plain = stored.to_plain();
            let weighted = plain.weighted_objective(&a, &q)?;
            let unweighted = frobenius_error(&a, &plain.reconstruct_full())?.powi(2);
            let report = match &stored {
                StoredModel::Plain(m) => m.memory_footprint(),
                StoredModel::Quantized(m) => m.memory_footprint(),
            };
            print_report(out, &report)?;
            writeln!(out, "objective:         {weighted}")?;
            writeln!(out, "unweighted error:  {unweighted}")?;
        }
        Command::Reconstruct {
            model,
            row,
            out: path,
            dtype,
        } => {
            let plain = load_model(&model)?.to_plain();
            if let Some(i) = row {
                let values = plain.reconstruct_row(i)?;
                let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", line.join(","))?;
            } else if let Some(path) = path {
                let dtype = if dtype == "f64" {
                    Dtype::F64
                } else {
                    Dtype::F32
                };
                write_matrix(&path, &plain.reconstruct_full(), dtype)?;
            }
        }
        Command::Ablate {
            matrix,
            freq,
            clusters,
            budget,
            refine,
            out: path,
        } => {
            let (a, q) = load_inputs(&matrix, &freq)?;
            let clusters = clusters.unwrap_or_else(|| default_cluster_count(a.rows()));
            let budget = budget_params(budget, a.rows(), a.cols())?;
            let report = ablation_run(&a, &q, clusters, budget, &refine.config(a.rows()))?;
            write_atomic(&path, ablation_csv(&report).as_bytes())?;
            for row in &report.rows {
                writeln!(
                    out,
                    "{:<20} params={:<10} weighted={}",
                    row.strategy.label(),
                    row.parameter_count,
                    row.weighted_error
                )?;
            }
        }
        Command::Spectrum { matrix, out: path } => {
            let s = spectrum(&read_matrix(&matrix)?)?;
            write_atomic(&path, spectrum_csv(&s).as_bytes())?;
        }
        Command::Curve {
            matrix,
            ranks,
            out: path,
        } => {
            let c = error_curve(&read_matrix(&matrix)?, &ranks)?;
            write_atomic(&path, curve_csv(&c).as_bytes())?;
        }
        Command::Zipf { freq, out: path } => {
            let (_, counts) = read_frequency_file(&freq)?;
            if counts.is_empty() {
                return Err(Error::Parse {
                    line: 0,
                    message: "frequency file is empty".into(),
                });
            }
            let stats = zipf_stats(&FrequencyTable::from_counts(&counts));
            write_atomic(&path, zipf_csv(&stats).as_bytes())?;
        }
        Command::Baseline(args) => {
            let a = read_matrix(&args.matrix)?;
            let q = args
                .freq
                .as_deref()
                .map(|p| read_frequencies(p, a.rows()))
                .transpose()?;
            let (report, approx) = if let Some(k) = args.svd {
                let f = lowrank_baseline(&a, k)?;
                (f.memory_footprint(), f.reconstruct())
            } else if let Some(frac) = args.prune_budget {
                let p = prune_to_budget(&a, budget_params(frac, a.rows(), a.cols())?)?;
                (p.memory_footprint(), p.to_dense())
            } else if let Some(bits) = args.quant_bits {
                let qm = quantize_uniform(&a, bits)?;
                (qm.memory_footprint(), dequantize(&qm))
            } else {
                unreachable!("clap requires one baseline method")
            };
            print_report(out, &report)?;
            writeln!(
                out,
                "unweighted error:  {}",
                frobenius_error(&a, &approx)?.powi(2)
            )?;
            if let Some(q) = q {
                writeln!(
                    out,
                    "objective:         {}",
                    weighted_error(&a, &q, &approx)
                )?;
            }
        }
        Command::Generate {
            rows,
            dim,
            clusters,
            noise,
            seed,
            matrix_out,
            freq_out,
        } => {
            let inst = gen_zipf_embedding(rows, dim, clusters, noise, seed)?;
            write_matrix(&matrix_out, &inst.matrix, Dtype::F32)?;
            let tokens: Vec<String> = (0..rows).map(|i| format!("tok{i}")).collect();
            let counts: Vec<u64> = inst
                .freqs
                .as_slice()
                .iter()
                .map(|&f| f.round() as u64)
                .collect();
            write_frequency_file(&freq_out, &tokens, &counts)?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code. Usage errors exit with 2; runtime errors
/// print one `error:` line and exit with [`Error::code`].
pub fn cli_main<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}
