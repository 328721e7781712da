mod bench;
mod commands;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mctd_core::Error;

/// Transition-density estimation for Markov chains on dyadic partitions.
#[derive(Debug, Parser)]
#[command(name = "mctd", version)]
struct Cli {
    /// Worker threads for replicate and per-cube parallelism.
    #[arg(long, global = true, env = "MCTD_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one of the example chains and write it as a one-column CSV.
    Simulate(SimulateArgs),
    /// Select a partition for a sample and write the estimate.
    Estimate(EstimateArgs),
    /// Monte-Carlo risks of the selected estimator for one example.
    Risk(RiskArgs),
    /// Rerun a published risk table and write reference and measured values.
    Reproduce(ReproduceArgs),
    /// Time the selection over a grid of sample sizes and depths.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
struct QuadArgs {
    /// Gauss-Legendre order of each quadrature panel.
    #[arg(long, default_value_t = 16)]
    quad_order: usize,
}

impl QuadArgs {
    fn spec(&self) -> mctd_core::QuadSpec {
        mctd_core::QuadSpec {
            order: self.quad_order,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Example chain, 1 to 7.
    #[arg(long)]
    example: u8,
    /// Number of transitions; the output has n + 1 rows.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the default burn-in of the example.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Headerless CSV with one state per row.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    input: Option<PathBuf>,
    /// Simulate this example chain instead of reading a sample.
    #[arg(long)]
    example: Option<u8>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximal depth of the candidate partitions.
    #[arg(long, default_value_t = 7)]
    ell: u32,
    /// Penalty constant.
    #[arg(long = "L", default_value_t = mctd_core::select::DEFAULT_L)]
    l: f64,
    /// Side of the evaluation grid.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RiskArgs {
    #[arg(long)]
    example: u8,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Depths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
    ell: Vec<u32>,
    #[arg(long = "L", default_value_t = mctd_core::select::DEFAULT_L)]
    l: f64,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// Base seed; replicate r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compute the true-risk oracle and the ratio to it.
    #[arg(long)]
    oracle: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    /// Risk against depth 1 to 10, n = 1000.
    Figure2,
    /// Selected and oracle Hellinger risks with ratio quantiles, depth 7.
    Figure4,
    /// Empirical L2 risk at depth 7.
    Figure5,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    table: Table,
    /// Restrict to one example; all seven by default.
    #[arg(long)]
    example: Option<u8>,
    /// Replicates per example; 100 for figure2 and 250 otherwise by default.
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7")]
    ell: Vec<u32>,
    /// Timings per point; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing CSV; fitted exponents go to the sibling `_fit.csv`.
    #[arg(long)]
    out: PathBuf,
}

/// Exit status for an error: 2 for invalid input or configuration, 3 for
/// I/O, 4 when a size guard refused the request.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io { .. } => 3,
                Error::Capacity(_) => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Risk(a) => commands::risk(&a),
        Command::Reproduce(a) => commands::reproduce(&a),
        Command::Bench(a) => bench::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
