// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line driver: `simulate`, `detect`, `evaluate` and `bench`.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
//! Diagnostics go to standard error; machine output goes to files or
//! standard output.

pub mod bench;
pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "kdwbs", version, about = "Kernel-density CUSUM change-point detection")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark scenario: data CSV plus truth JSON.
    Simulate(SimulateArgs),
    /// Detect change points in a CSV sample.
    Detect(DetectArgs),
    /// Score a detection result against a truth file.
    Evaluate(EvaluateArgs),
    /// Monte Carlo table: simulate, detect and evaluate over replicates.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub scenario: u8,
    /// Number of time points (multiple of 3).
    #[arg(long = "T")]
    pub len: usize,
    /// Dimension.
    #[arg(long = "p")]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}

/// Detector and selector knobs shared by `detect` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Bandwidth: `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    pub h: String,
    /// Number of random intervals.
    #[arg(long = "M", default_value_t = kdwbs::segmenter::DEFAULT_INTERVALS)]
    pub intervals: usize,
    /// Kernel family: gaussian, epanechnikov or uniform.
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
    /// Number of projection directions for the KS tests.
    #[arg(long = "N", default_value_t = kdwbs::selector::DEFAULT_DIRECTIONS)]
    pub directions: usize,
    /// BH declaration cutoff.
    #[arg(long, default_value_t = kdwbs::selector::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Build nested sets by rerunning the thresholded recursion per level.
    #[arg(long)]
    pub exact_tau: bool,
    /// Append the whole sample to the random intervals (default on).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub include_full_interval: bool,
    #[arg(long)]
    pub min_interval_len: Option<usize>,
    #[arg(long)]
    pub max_interval_len: Option<usize>,
    /// Gram memory budget in bytes before falling back to on-the-fly sums.
    #[arg(long, default_value_t = kdwbs::kernel::DEFAULT_GRAM_BUDGET)]
    pub gram_budget: u64,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input CSV (one row per time point).
    #[arg(long, required_unless_present = "from_manifest")]
    pub input: Option<PathBuf>,
    /// Output JSON path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fixed threshold; without it the threshold is selected automatically.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rerun the configuration recorded in a manifest or result JSON.
    #[arg(long, conflicts_with_all = ["input", "tau"])]
    pub from_manifest: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Scenario ids, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=5), required = true)]
    pub scenario: Vec<u8>,
    #[arg(long = "T", default_value_t = 150)]
    pub len: usize,
    #[arg(long = "p", default_value_t = 10)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Replicate r uses seed `seed + r`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report how often path levels differ from exact reruns.
    #[arg(long)]
    pub exact_tau_audit: bool,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Bench(a) => commands::bench(&a),
    }
}
