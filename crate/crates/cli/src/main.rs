use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bench;
mod commands;
mod record;

/// Exact solver toolkit for quadratic bin packing.
#[derive(Parser, Debug)]
#[command(name = "qbpp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one instance, one mu-group, or the full benchmark.
    Generate(GenerateArgs),
    /// Solve an instance with branch-and-price.
    Solve(SolveArgs),
    /// Write compact MILP models in LP format.
    Export(ExportArgs),
    /// Solve every instance of a directory under one or more configurations.
    Bench(BenchArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Solve a small instance (n <= 12) by partition enumeration.
    Oracle(OracleArgs),
    /// Solve a quadratic knapsack pricing problem file.
    Pricing(PricingArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Generate the full benchmark (restricted to --n sizes when given).
    #[arg(long)]
    pub full: bool,
    /// Item count; a comma-separated list with --full.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sign regime of the dissimilarities: minus, plus or mixed.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Write all three mu values of the configuration.
    #[arg(long)]
    pub group: bool,
    /// Copy number (1-based).
    #[arg(long, default_value_t = 1)]
    pub copy: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// Slots per state of the constructive pricing heuristic.
    #[arg(long, default_value_t = 5)]
    pub h: usize,
    /// Columns added per column-generation iteration.
    #[arg(long, default_value_t = 10)]
    pub max_cols: usize,
    /// Seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Recorded in the output; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the best solution.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Where to write the JSON record (it is always printed).
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Include the per-iteration column-generation trace in the record.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub instance: PathBuf,
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    pub tag: Option<String>,
    #[arg(long)]
    pub all: bool,
    /// Output directory; defaults to the instance's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub dir: PathBuf,
    /// Solver configurations as HxC (MCH slots x columns per iteration).
    #[arg(long, value_delimiter = ',', default_value = "1x1,5x10")]
    pub configs: Vec<String>,
    /// Seconds per run.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Worker threads; defaults to QBPP_THREADS or the available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PricingArgs {
    pub problem: PathBuf,
    /// Exact branch and bound (default).
    #[arg(long, group = "method")]
    pub exact: bool,
    /// Subset enumeration (n <= 20).
    #[arg(long, group = "method")]
    pub enumerate: bool,
    /// Constructive heuristic with --h slots.
    #[arg(long, group = "method")]
    pub mch: bool,
    #[arg(long, default_value_t = 5)]
    pub h: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Export(a) => commands::export(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Pricing(a) => commands::pricing(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
