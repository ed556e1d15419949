//! `witness-sampler`: build benchmark systems, compute witness sets, move
//! them between random planes and run the conditioning experiment.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use witsamp_core::conditioning::ConditionMeasure;
use witsamp_core::TrackingMode;

use failure::{Failure, Outcome, Status};

pub const THREADS_VAR: &str = "WITNESS_SAMPLER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "witness-sampler", version, about = "Sample solution sets of polynomial systems through witness sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a benchmark system in text format.
    Generate {
        #[command(subcommand)]
        system: SystemKind,
    },
    /// Compute a witness set by total-degree homotopy.
    Witness(WitnessArgs),
    /// Move a witness set to a random plane drawn from the seed.
    Sample(SampleArgs),
    /// Move a witness set repeatedly in both modes and summarize the cost.
    Compare(CompareArgs),
    /// Conditioning of companion matrices with and without an offset.
    Condition(ConditionArgs),
}

#[derive(Subcommand, Debug)]
pub enum SystemKind {
    /// Adjacent 2×2 minors of a 2×cols matrix.
    Minors {
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cyclic n-roots.
    Cyclic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One random sparse polynomial x1^d + (t terms) + linear part.
    Hypersurface {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 5)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long)]
    system: PathBuf,
    /// Codimension k of the solution set, also the dimension of the slicing plane.
    #[arg(long)]
    codim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TrackerArgs {
    /// Step size as a fraction of the distance (local) or of t (global).
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Threshold of the a priori step control.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Step reduction factor.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    witness: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "local")]
    mode: TrackingMode,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-path statistics CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    witness: PathBuf,
    #[arg(long, default_value_t = 5)]
    moves: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConditionArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    t: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, default_value = "balanced")]
    measure: ConditionMeasure,
    /// Per-degree CSV; the ratio table goes next to it with a `.ratios.csv` suffix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path of the ratio table, overriding the default next to --out.
    #[arg(long)]
    ratios: Option<PathBuf>,
}

fn configure_threads() -> Outcome {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::usage(format!("{THREADS_VAR} must be a non-negative integer, got `{v}`")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Generate { system } => commands::generate(system),
        Command::Witness(a) => commands::witness(a),
        Command::Sample(a) => commands::sample(a),
        Command::Compare(a) => commands::compare(a),
        Command::Condition(a) => commands::condition(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}
