//! Command-line front end for the relay antenna selection simulator.
//!
//! Subcommands map one-to-one onto the library's experiment runners
//! plus a validation entry point and an exhaustive-search cost
//! estimator. All experiment parameters come from a JSON config file,
//! adjustable per invocation with repeatable `--set key=value` flags.

pub mod config;
pub mod output;

use afrelay_core::experiment::{
    run_ber_experiment, run_mse_experiment, run_selection_histogram, summarize, ExperimentConfig,
    ExperimentError, ExperimentResult,
};
use afrelay_core::{
    exhaustive_trial_count, incremental_equivalence_suite, sherman_morrison_suite,
    wiener_agreement_suite, SelectionError, Sweep,
};
use clap::{Args, Parser, Subcommand};
use config::FileConfig;
use std::path::PathBuf;
use thiserror::Error;

/// Errors are sorted into the process exit statuses: configuration
/// mistakes (2), exhaustive budget refusals (3), and everything else
/// (1). Messages are single-line.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

fn map_experiment_error(err: ExperimentError) -> CliError {
    match &err {
        ExperimentError::Selection(SelectionError::BudgetExceeded { .. }) => {
            CliError::Budget(err.to_string())
        }
        ExperimentError::Selection(SelectionError::InsufficientRelays { .. })
        | ExperimentError::Selection(SelectionError::InvalidLevelCap { .. })
        | ExperimentError::Selection(SelectionError::CountOverflow)
        | ExperimentError::NoTrials
        | ExperimentError::NoSchemes
        | ExperimentError::EmptySweep
        | ExperimentError::BadNoiseScale(_)
        | ExperimentError::NoSymbolBlocks
        | ExperimentError::Config(_) => CliError::Config(err.to_string()),
        _ => CliError::Internal(err.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "afrelay",
    version,
    about = "Simulate MMSE antenna selection in two-hop amplify-and-forward relay networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the relay count and record the closed-form MSE per scheme.
    MseVsK(RunArgs),
    /// Sweep the source SNR and record QPSK bit error rates per scheme.
    BerVsSnr(RunArgs),
    /// Record the distribution of the greedy selected-pair count over an
    /// SNR sweep; also writes `<out>.hist.csv`.
    Histogram(RunArgs),
    /// Run the numerical self-check suites and exit 0 only if all pass.
    Validate(ValidateArgs),
    /// Print the exhaustive-search trial count for each configured relay
    /// count, one per line.
    CountTrials(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker thread count; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Config override as key=value, where the value is JSON (or a bare
    /// string). Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomized check suites.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Config override as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// Runs the full sweep one point at a time so progress is visible on
/// stderr. Per-trial state never crosses sweep points, so the stitched
/// result is identical to a single run over the whole grid.
fn run_pointwise(
    config: &ExperimentConfig,
    run: impl Fn(&ExperimentConfig) -> Result<ExperimentResult, ExperimentError>,
) -> Result<ExperimentResult, CliError> {
    config.validate().map_err(map_experiment_error)?;
    let values = config.sweep.values();
    let total = values.len();
    let mut points = Vec::with_capacity(total);
    for (index, value) in values.into_iter().enumerate() {
        eprintln!("[{}/{total}] {value}: {} trials", index + 1, config.trials);
        let mut point_config = config.clone();
        point_config.sweep = match value {
            afrelay_core::SweepValue::RelayCount(k) => Sweep::RelayCount(vec![k]),
            afrelay_core::SweepValue::SourceSnrDb(db) => Sweep::SourceSnrDb(vec![db]),
        };
        let mut result = run(&point_config).map_err(map_experiment_error)?;
        points.append(&mut result.points);
    }
    Ok(ExperimentResult { points })
}

fn run_mse_vs_k(args: &RunArgs) -> Result<(), CliError> {
    let file = FileConfig::load(&args.config, &args.set)?;
    let k_list = file.sweep_relay_counts()?;
    let config = file.experiment(
        Sweep::RelayCount(k_list.clone()),
        k_list[0],
        args.seed,
        args.workers,
    )?;
    let result = run_pointwise(&config, run_mse_experiment)?;
    output::write_csv(&result, &args.out)?;
    print!("{}", summarize(&result));
    Ok(())
}

fn run_ber_vs_snr(args: &RunArgs) -> Result<(), CliError> {
    let file = FileConfig::load(&args.config, &args.set)?;
    let snr_list = file.sweep_snr_dbs()?;
    let relay_count = file.fixed_relay_count()?;
    let config = file.experiment(
        Sweep::SourceSnrDb(snr_list),
        relay_count,
        args.seed,
        args.workers,
    )?;
    let result = run_pointwise(&config, run_ber_experiment)?;
    output::write_csv(&result, &args.out)?;
    print!("{}", summarize(&result));
    Ok(())
}

fn run_histogram(args: &RunArgs) -> Result<(), CliError> {
    let file = FileConfig::load(&args.config, &args.set)?;
    let snr_list = file.sweep_snr_dbs()?;
    let relay_count = file.fixed_relay_count()?;
    let config = file.experiment(
        Sweep::SourceSnrDb(snr_list),
        relay_count,
        args.seed,
        args.workers,
    )?;
    let result = run_pointwise(&config, run_selection_histogram)?;
    output::write_csv(&result, &args.out)?;
    output::write_histogram_csv(&result, &args.out)?;
    print!("{}", summarize(&result));
    Ok(())
}

fn run_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let reports = [
        incremental_equivalence_suite(args.seed, 32, 1e-9),
        sherman_morrison_suite(args.seed, 20),
        wiener_agreement_suite(args.seed, 20, 1_000_000, 0.02),
    ];
    for report in &reports {
        println!("{report}");
    }
    if reports.iter().all(|report| report.passed()) {
        Ok(())
    } else {
        Err(CliError::Internal("validation failed".into()))
    }
}

fn run_count_trials(args: &ConfigArgs) -> Result<(), CliError> {
    let file = FileConfig::load(&args.config, &args.set)?;
    for k in file.counted_relay_counts()? {
        let network = file.network(k)?;
        let count = exhaustive_trial_count(&network, k)
            .map_err(|err| CliError::Config(err.to_string()))?;
        println!("{count}");
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::MseVsK(args) => run_mse_vs_k(args),
        Command::BerVsSnr(args) => run_ber_vs_snr(args),
        Command::Histogram(args) => run_histogram(args),
        Command::Validate(args) => run_validate(args),
        Command::CountTrials(args) => run_count_trials(args),
    }
}
