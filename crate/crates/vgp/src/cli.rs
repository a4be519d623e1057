use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vgp_core::expansion::DEFAULT_BUDGET;
use vgp_core::{Tolerances, TOL_PHASE};

#[derive(Debug, Parser)]
#[command(name = "vgp", version, about = "Sign-problem analysis of Hamiltonians via geometric phases")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalOpts {
    /// Input document; standard input when absent.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Tolerance for a cycle phase to count as zero modulo 2 pi.
    #[arg(long, global = true, default_value_t = TOL_PHASE)]
    pub tol_phase: f64,
    /// Magnitude below which matrix elements are dropped.
    #[arg(long, global = true, default_value_t = Tolerances::DEFAULT.zero)]
    pub tol_zero: f64,
    /// Allowed deviation from hermiticity.
    #[arg(long, global = true, default_value_t = Tolerances::DEFAULT.herm)]
    pub tol_herm: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Stoquastic,
    Spf,
    SignProblem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Stoq,
    Abs,
}

#[derive(Clone, Debug, Args)]
pub struct SeriesArgs {
    /// Relative truncation tolerance of the series.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Work cap in dynamic-programming cells.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Truncate at exactly this order.
    #[arg(long)]
    pub q_max: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vanishing-phase test, stoquasticity and chordless-cycle summary.
    Analyze {
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long, default_value_t = 100_000)]
        max_count: usize,
    },
    /// Diagonal rotation that makes a curable Hamiltonian stoquastic.
    Cure,
    /// Replace every off-diagonal element by minus its magnitude.
    Stoquasticize,
    /// Seeded random instance with ground-truth metadata.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Truncated expansion of the partition function.
    Partition {
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Weighted signs of the stoquasticized and abs-cosine schemes.
    Signs {
        #[arg(long, required_unless_present = "scan")]
        beta: Option<f64>,
        /// Range `b0:b1:steps` of inverse temperatures, endpoints included.
        #[arg(long, conflicts_with = "beta")]
        scan: Option<String>,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Markov-chain estimate of a weighted sign.
    Sample {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 10_000)]
        burn_in: u64,
        /// Independent chains, seeded `seed`, `seed + 1`, ...
        #[arg(long, default_value_t = 1)]
        chains: u64,
    },
    /// Divided difference of exp(-beta x) from `{"beta", "energies"}`.
    Dd,
}
