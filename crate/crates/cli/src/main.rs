//! `rqcsim`: generate random circuits, compute amplitudes and samples with
//! the tensor-network engine, check them against the state-vector oracle,
//! and estimate simulation costs.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Serialize)]
#[command(name = "rqcsim", version, about = "Random quantum circuit simulator")]
pub struct Cli {
    /// Seed for every random choice (circuit generation, output strings,
    /// path selection, sampling).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every hardware thread.
    #[arg(long, global = true, env = "RQCSIM_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Largest working set of one contraction step, in bytes.
    #[arg(long, global = true)]
    pub memory_budget: Option<usize>,
    /// Scalar type of the tensor network.
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::Single)]
    pub precision: PrecisionArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionArg {
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Sum every path.
    Exact,
    /// Sum a random fraction of the paths.
    Fraction,
    /// Exact amplitudes mixed with uniform noise.
    Mixed,
}

/// Where the circuit comes from: a file, or a lattice and depth generated
/// with `--seed`.
#[derive(Args, Clone, Debug, Serialize)]
pub struct Source {
    /// Circuit file written by `gen`.
    #[arg(long, conflicts_with_all = ["lattice", "depth"], required_unless_present = "lattice")]
    pub circuit: Option<PathBuf>,
    /// `grid:RxC`, `bristlecone:N` or `file:PATH`.
    #[arg(long, requires = "depth")]
    pub lattice: Option<String>,
    /// Depth `1+t+1`.
    #[arg(long, requires = "lattice")]
    pub depth: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct PlanArg {
    /// `auto` for the built-in plan of the lattice, or a plan file.
    #[arg(long, default_value = "auto")]
    pub plan: String,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct FidelityArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Target fidelity for `fraction` and `mixed` modes.
    #[arg(long, default_value_t = 1.0)]
    pub fidelity: f64,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Write a random circuit file.
    Gen {
        #[command(flatten)]
        source: Source,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Amplitudes of given output strings, or one batch sharing the bits
    /// outside the plan's batch region.
    Amplitude {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        plan: PlanArg,
        #[command(flatten)]
        fidelity: FidelityArgs,
        /// Input string; all zeros when absent.
        #[arg(long = "in")]
        input: Option<String>,
        /// Output strings (repeatable).
        #[arg(long = "out", conflicts_with = "s_ab")]
        outputs: Vec<String>,
        /// Bits outside the batch region, for a batch.
        #[arg(long)]
        s_ab: Option<String>,
        /// Batch size.
        #[arg(long, default_value_t = 1)]
        n_c: usize,
        /// Also print the oracle amplitude of each output.
        #[arg(long)]
        oracle: bool,
    },
    /// Draw samples with the frugal rejection sampler.
    Sample {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        plan: PlanArg,
        #[command(flatten)]
        fidelity: FidelityArgs,
        #[arg(long)]
        samples: usize,
        /// Rejection ceiling `M`.
        #[arg(long, default_value_t = rqcsim::sampler::DEFAULT_M)]
        m: f64,
        /// Batch size.
        #[arg(long, default_value_t = 1)]
        n_c: usize,
    },
    /// Compare engine amplitudes of random output strings with the oracle.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Largest accepted absolute difference; defaults to 1e-5 in single
        /// precision and 1e-10 in double.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Statistics of output probabilities.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Qubit complexity of partitioned simulation.
    Complexity {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        depth: String,
        /// `bi`, `tri`, `tri1`..`tri5`, `quad` or `all`.
        #[arg(long, default_value = "all")]
        scheme: String,
    },
    /// Kernel benchmarks.
    Bench {
        #[command(subcommand)]
        what: Bench,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyze {
    /// Histogram of `N p` over engine batches against `exp(-x)`.
    Pt {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        plan: PlanArg,
        /// Batches of random outer bits.
        #[arg(long, default_value_t = 16)]
        batches: usize,
        /// Batch size; the whole batch region when absent.
        #[arg(long)]
        n_c: Option<usize>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Pearson correlation between batch entries against Hamming distance.
    Pearson {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long, default_value_t = 200)]
        batches: usize,
        /// Batch size; the whole batch region when absent.
        #[arg(long)]
        n_c: Option<usize>,
    },
    /// Cross-entropy fidelity of samples written by `sample`, against the
    /// oracle distribution.
    Xeb {
        #[command(flatten)]
        source: Source,
        /// JSON-lines file with `{"sample": "0101..."}` records.
        #[arg(long)]
        samples: PathBuf,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bench {
    /// Times single L and R moves against the naive permutation.
    Permute {
        #[arg(long, default_value_t = 24)]
        rank: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
        gamma: Vec<usize>,
        #[arg(long = "bench-threads", value_delimiter = ',', default_values_t = [1usize])]
        bench_threads: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
