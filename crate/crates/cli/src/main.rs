//! `channel-dichotomy` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input or parameters,
//! 3 numerical failure.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const THREADS_ENV: &str = "CHANNEL_DICHOTOMY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "channel-dichotomy", version, about = "Random quantum channels: entanglement breaking, wedge invariants, extremality")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct TolArgs {
    /// Relative singular-value / eigenvalue cutoff.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a Haar-random unital Kraus tuple and write it as channel JSON.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rank: usize,
        /// Generated and recorded in the file when omitted.
        #[arg(long)]
        seed: Option<u64>,
        /// Stream index within the seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Rank, extremality, wedge invariants and entanglement class of a channel.
    Analyze {
        #[arg(long)]
        channel: std::path::PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value_t = channel_dichotomy::linalg::DEFAULT_SIZE_GUARD)]
        size_guard: usize,
    },
    /// Separability verdict of the channel's Choi state.
    Classify {
        #[arg(long)]
        channel: std::path::PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Check a rank-one mixing certificate; without --cert, checks the tuple itself.
    Certify {
        #[arg(long)]
        channel: std::path::PathBuf,
        #[arg(long)]
        cert: Option<std::path::PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Build an extremal channel or a channel from a Holevo form.
    Make {
        #[arg(long, value_enum)]
        kind: MakeKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Tuple length for --kind extremal.
        #[arg(long)]
        rank: Option<usize>,
        /// Holevo form JSON ({"omegas": [...], "effects": [...]}).
        #[arg(long)]
        holevo: Option<std::path::PathBuf>,
        /// Number of terms of a random Holevo form (requires --seed).
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Seeded Monte Carlo experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MakeKind {
    Extremal,
    Holevo,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long)]
    pub trials: usize,
    /// Master seed; generated and recorded in the output when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Write the result table as CSV.
    #[arg(long)]
    pub csv: Option<std::path::PathBuf>,
    /// Write the full JSON result.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Dims {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub rank: usize,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Fraction of random rank-r channels that preserve entanglement.
    Ep {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        common: Common,
    },
    /// Entangled fraction of output states over random input vectors.
    Zeroone {
        #[arg(long)]
        channel: std::path::PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fraction of random rank-r channels that are extremal.
    Extremal {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        common: Common,
    },
    /// Fraction of random vectors in C^n ⊗ C^n with full Schmidt rank.
    Cyclicity {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fraction of random r-tuples whose minimal length is r.
    Rank {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        common: Common,
    },
    /// EP fraction for every rank 1..mn.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::configure_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
