//! `envybench`: experiment harness for envy-free pricing and sampling auctions.
//!
//! Instances are JSON files:
//!
//! ```json
//! {
//!   "id": "demo",
//!   "environment": { "kind": "multi-unit", "n": 3, "k": 2 },
//!   "permuted": false,
//!   "values": ["6/1", "4/1", "4/1"]
//! }
//! ```
//!
//! `kind` is one of `digital-good {n}`, `multi-unit {n, k}`, `position {weights}`,
//! `uniform-matroid {n, k}`, `partition-matroid {sector, capacity}`,
//! `transversal-matroid {items, desires}`, `downward-closed {n, sets}`,
//! `single-minded {items, bundles}` and `one-vs-n {n}` (n + 1 agents). Values are listed
//! by agent id as `"num/den"` strings (plain JSON numbers are accepted on input). An
//! optional `distribution` holds `{"values": [...], "probs": [...]}`.
//!
//! Exit codes: 0 ok, 1 usage, 2 schema, 3 precondition or size limit, 4 a check failed.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use envybench::Error;

#[derive(Parser, Debug)]
#[command(name = "envybench", version, about = "Envy-free benchmarks and sampling auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Envy-free optimum, EFO2 and VCGr of an instance.
    Efo(EfoArgs),
    /// Revenue ratio of a mechanism against a benchmark, as CSV.
    Run(RunArgs),
    /// Writes a generated instance.
    Gen(GenArgs),
    /// Writes a target vector as a mixture of permuted weights.
    Decompose(DecomposeArgs),
    /// Characteristic weights of a matroid instance.
    Weights(WeightsArgs),
    /// Runs the invariant suite on an instance.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
struct SeedArg {
    /// Base seed for randomized runs.
    #[arg(long, env = envybench::seed::SEED_ENV)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct OutArg {
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Args, Debug)]
struct EfoArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Print the revenue curve as CSV (i, R, IR, phi, phiBar) instead.
    #[arg(long)]
    curve: bool,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Sampled role permutations in mc mode.
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// One of vickrey, vcg-reserve, rsem, rsem-prime, mu-reduction, position-reduction,
    /// matroid-reduction.
    #[arg(long)]
    mechanism: String,
    /// efo2, efo or vcgr.
    #[arg(long, default_value = "efo2")]
    benchmark: String,
    #[arg(long, value_enum, default_value = "mc")]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    OneVsN,
    OperaHouse,
    KUnit,
    DownwardClosed,
    Matroid,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    /// Number of agents (small agents for one-vs-n).
    #[arg(long)]
    n: Option<usize>,
    /// Tiers of the opera house (2 or 3).
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Base value of one-vs-n.
    #[arg(long, default_value = "1")]
    v: String,
    /// Virtual-value step of one-vs-n.
    #[arg(long, default_value = "0")]
    eps: String,
    /// Largest random integer value.
    #[arg(long, default_value_t = 100)]
    max: i64,
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// Nonincreasing weights, comma separated.
    #[arg(long)]
    weights: String,
    /// Target vector majorized by the weights, comma separated.
    #[arg(long)]
    target: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct WeightsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Grid resolution for brute force and misreport probes.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    /// Random splits for the subadditivity check; needs a seed.
    #[arg(long, default_value_t = 16)]
    splits: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Schema(String),
    Precondition(String),
    CheckFailed(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::CheckFailed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Schema(m) | CliError::Precondition(m) => f.write_str(m),
            CliError::CheckFailed(k) => write!(f, "{k} check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema(_) => CliError::Schema(e.to_string()),
            Error::Unknown { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Efo(a) => commands::efo(a),
        Command::Run(a) => commands::run(a),
        Command::Gen(a) => commands::gen(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Weights(a) => commands::weights(a),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("envybench: {e}");
            ExitCode::from(e.code())
        }
    }
}
