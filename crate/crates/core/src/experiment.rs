//! Monte Carlo experiments over random network draws.
//!
//! An experiment sweeps one network parameter (relay count or source
//! SNR), runs a set of selection schemes on the same channel draws at
//! every sweep point, and aggregates per-trial link MSE, detection BER,
//! and selected-set sizes into means with 95% confidence intervals.
//!
//! Trials are independent and run on a rayon pool; per-trial records are
//! collected in trial order and folded sequentially, so results are
//! bit-identical for any worker count.

use crate::channel::{draw_network, ChannelRealization, ConfigError, NetworkConfig, TrialRng};
use crate::link::{build_link, equivalent_link, transmit_qpsk, LinkError};
use crate::selection::{
    apply_global_power_constraint, dors_select, exhaustive_select, exhaustive_trial_count,
    gmm_select, so_select, Scheme, SelectionError, SelectionResult, DEFAULT_EXHAUSTIVE_BUDGET,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment needs at least one trial")]
    NoTrials,
    #[error("experiment needs at least one scheme")]
    NoSchemes,
    #[error("experiment sweep has no values")]
    EmptySweep,
    #[error("noise scale must be finite and non-negative, got {0}")]
    BadNoiseScale(f64),
    #[error("detection runs need at least one symbol block per trial")]
    NoSymbolBlocks,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// The swept parameter with its grid of values.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// Vary the number of relays, keeping powers fixed.
    RelayCount(Vec<usize>),
    /// Vary the source SNR in dB, which equals the source power in dB
    /// under the unit-variance noise convention.
    SourceSnrDb(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> Vec<SweepValue> {
        match self {
            Sweep::RelayCount(ks) => ks.iter().map(|&k| SweepValue::RelayCount(k)).collect(),
            Sweep::SourceSnrDb(dbs) => dbs.iter().map(|&db| SweepValue::SourceSnrDb(db)).collect(),
        }
    }
}

/// One point of a sweep grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepValue {
    RelayCount(usize),
    SourceSnrDb(f64),
}

impl SweepValue {
    /// The base network adjusted to this sweep point.
    pub fn apply(&self, network: &NetworkConfig) -> Result<NetworkConfig, ConfigError> {
        match *self {
            SweepValue::RelayCount(k) => network.with_relay_count(k),
            SweepValue::SourceSnrDb(db) => network.with_source_power(10f64.powf(db / 10.0)),
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::RelayCount(k) => write!(f, "k={k}"),
            SweepValue::SourceSnrDb(db) => write!(f, "snr_db={db}"),
        }
    }
}

/// Full experiment description. Fields are public; [`validate`] is run
/// by every entry point.
///
/// [`validate`]: ExperimentConfig::validate
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub sweep: Sweep,
    pub schemes: Vec<Scheme>,
    pub trials: u64,
    pub seed: u64,
    /// QPSK symbol vectors sent per trial in detection runs.
    pub symbol_blocks_per_trial: u64,
    /// Largest selected-set size the exhaustive scheme may visit;
    /// defaults to the relay count of each sweep point.
    pub l_max: Option<usize>,
    /// Trial cap for the exhaustive scheme, checked before any work.
    pub budget: u64,
    /// Rayon worker count; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Noise standard-deviation override for detection runs, applied to
    /// the injected noise and to the detection filter's model alike.
    /// 1.0 models the link; 0.0 makes transmission noiseless with
    /// zero-forcing detection.
    pub noise_scale: f64,
}

impl ExperimentConfig {
    pub fn new(network: NetworkConfig, sweep: Sweep) -> Self {
        Self {
            network,
            sweep,
            schemes: vec![Scheme::Gmm, Scheme::Dors, Scheme::SemiOrthogonal],
            trials: 100,
            seed: 1,
            symbol_blocks_per_trial: 200,
            l_max: None,
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
            workers: None,
            noise_scale: 1.0,
        }
    }

    /// Checks counts, the noise scale, and that every sweep point is a
    /// valid network. When the exhaustive scheme is requested, also
    /// checks its trial count against the budget at every point, so a
    /// doomed run fails before the first draw.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        if self.schemes.is_empty() {
            return Err(ExperimentError::NoSchemes);
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(ExperimentError::BadNoiseScale(self.noise_scale));
        }
        let values = self.sweep.values();
        if values.is_empty() {
            return Err(ExperimentError::EmptySweep);
        }
        for value in &values {
            let network = value.apply(&self.network)?;
            if self.schemes.contains(&Scheme::Exhaustive) {
                let l_max = self.l_max.unwrap_or_else(|| network.relay_count());
                let required = exhaustive_trial_count(&network, l_max)?;
                if required > self.budget {
                    return Err(SelectionError::BudgetExceeded {
                        required,
                        budget: self.budget,
                    }
                    .into());
                }
            }
        }
        Ok(())
    }
}

/// Per-scheme aggregates at one sweep point.
#[derive(Clone, Debug)]
pub struct SchemeStats {
    pub scheme: Scheme,
    /// Mean link MSE across trials, including the dimension term that
    /// completes the per-stream error sum when `nd > ns`.
    pub mean_mse: f64,
    /// Half-width of the 95% confidence interval on the mean MSE.
    pub mse_ci95: f64,
    /// Mean bit error rate, present only for detection runs.
    pub mean_ber: Option<f64>,
    pub ber_ci95: Option<f64>,
    /// Mean number of selected pairs.
    pub mean_selected: f64,
    /// Selected-set size distribution: size -> trial count.
    pub level_histogram: BTreeMap<usize, u64>,
    /// Accumulated wall time spent inside this scheme, summed over
    /// trials (and therefore over workers).
    pub seconds: f64,
}

/// All scheme aggregates at one sweep point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub sweep_value: SweepValue,
    pub stats: Vec<SchemeStats>,
}

/// Results for the whole sweep, in grid order.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub points: Vec<PointResult>,
}

/// Runs one scheme on one channel draw.
pub fn run_scheme(
    scheme: Scheme,
    channels: &ChannelRealization,
    network: &NetworkConfig,
    l_max: Option<usize>,
    budget: u64,
) -> Result<SelectionResult, SelectionError> {
    match scheme {
        Scheme::Gmm => Ok(gmm_select(channels, network)),
        Scheme::GmmGlobalPower => {
            let unconstrained = gmm_select(channels, network);
            Ok(apply_global_power_constraint(
                &unconstrained,
                channels,
                network,
            ))
        }
        Scheme::Dors => dors_select(channels, network),
        Scheme::SemiOrthogonal => so_select(channels, network),
        Scheme::Exhaustive => exhaustive_select(
            channels,
            network,
            l_max.unwrap_or_else(|| network.relay_count()),
            budget,
        ),
    }
}

struct SchemeTrial {
    mse: f64,
    level: usize,
    seconds: f64,
    bit_errors: u64,
    bits_sent: u64,
}

fn run_trial(
    config: &ExperimentConfig,
    network: &NetworkConfig,
    trial: u64,
    with_detection: bool,
) -> Result<Vec<SchemeTrial>, ExperimentError> {
    let channels = draw_network(network, config.seed, trial);
    let beta = network.sigma_x2() * (network.ns() as f64 - network.nd() as f64);
    let mut records = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let started = Instant::now();
        let selection = run_scheme(scheme, &channels, network, config.l_max, config.budget)?;
        let (bit_errors, bits_sent) = if with_detection {
            let link = build_link(
                &channels,
                &selection.pairs,
                network.sigma_x2(),
                selection.per_relay_power_used,
            )?;
            let eq = equivalent_link(&link);
            let mut rng = TrialRng::transmission(config.seed, trial);
            let mut errors = 0u64;
            let mut sent = 0u64;
            for _ in 0..config.symbol_blocks_per_trial {
                let bits: Vec<u8> = (0..2 * network.ns())
                    .map(|_| u8::from(rng.uniform() < 0.5))
                    .collect();
                let tx = transmit_qpsk(&eq, &bits, &mut rng, config.noise_scale)?;
                errors += bits
                    .iter()
                    .zip(&tx.detected_bits)
                    .filter(|(sent_bit, got_bit)| sent_bit != got_bit)
                    .count() as u64;
                sent += bits.len() as u64;
            }
            (errors, sent)
        } else {
            (0, 0)
        };
        records.push(SchemeTrial {
            mse: selection.mse + beta,
            level: selection.level(),
            seconds: started.elapsed().as_secs_f64(),
            bit_errors,
            bits_sent,
        });
    }
    Ok(records)
}

fn mean_and_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (variance / n).sqrt())
}

fn with_pool<T: Send>(workers: Option<usize>, run: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .expect("rayon pool construction")
            .install(run),
        None => run(),
    }
}

fn run_experiment(
    config: &ExperimentConfig,
    with_detection: bool,
) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    if with_detection && config.symbol_blocks_per_trial == 0 {
        return Err(ExperimentError::NoSymbolBlocks);
    }
    let mut points = Vec::new();
    for sweep_value in config.sweep.values() {
        let network = sweep_value.apply(&config.network)?;
        let trials: Vec<Vec<SchemeTrial>> = with_pool(config.workers, || {
            (0..config.trials)
                .into_par_iter()
                .map(|trial| run_trial(config, &network, trial, with_detection))
                .collect::<Result<_, _>>()
        })?;

        let mut stats = Vec::with_capacity(config.schemes.len());
        for (index, &scheme) in config.schemes.iter().enumerate() {
            let mse_values: Vec<f64> = trials.iter().map(|t| t[index].mse).collect();
            let (mean_mse, mse_ci95) = mean_and_ci95(&mse_values);

            let (mean_ber, ber_ci95) = if with_detection {
                let ber_values: Vec<f64> = trials
                    .iter()
                    .map(|t| t[index].bit_errors as f64 / t[index].bits_sent as f64)
                    .collect();
                let (mean, ci) = mean_and_ci95(&ber_values);
                (Some(mean), Some(ci))
            } else {
                (None, None)
            };

            let mut level_histogram = BTreeMap::new();
            let mut level_sum = 0u64;
            let mut seconds = 0.0;
            for trial in &trials {
                *level_histogram.entry(trial[index].level).or_insert(0) += 1;
                level_sum += trial[index].level as u64;
                seconds += trial[index].seconds;
            }
            stats.push(SchemeStats {
                scheme,
                mean_mse,
                mse_ci95,
                mean_ber,
                ber_ci95,
                mean_selected: level_sum as f64 / config.trials as f64,
                level_histogram,
                seconds,
            });
        }
        points.push(PointResult { sweep_value, stats });
    }
    Ok(ExperimentResult { points })
}

/// Sweeps the grid and aggregates the closed-form link MSE of every
/// scheme on paired channel draws.
pub fn run_mse_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    run_experiment(config, false)
}

/// Like [`run_mse_experiment`], but each trial additionally sends
/// `symbol_blocks_per_trial` QPSK symbol vectors across the selected
/// link and records the bit error rate of Wiener detection.
pub fn run_ber_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    run_experiment(config, true)
}

/// Distribution of the greedy selected-set size across trials: the MSE
/// experiment restricted to the greedy scheme, whose per-point
/// `level_histogram` is the quantity of interest.
pub fn run_selection_histogram(
    config: &ExperimentConfig,
) -> Result<ExperimentResult, ExperimentError> {
    let mut histogram_config = config.clone();
    histogram_config.schemes = vec![Scheme::Gmm];
    run_experiment(&histogram_config, false)
}

/// Fixed-width text table of all sweep points and schemes.
pub fn summarize(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<18} {:>13} {:>12} {:>12} {:>12} {:>8} {:>9}",
        "sweep", "scheme", "mean_mse", "mse_ci95", "mean_ber", "ber_ci95", "mean_L", "seconds"
    );
    for point in &result.points {
        for stats in &point.stats {
            let ber = stats
                .mean_ber
                .map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
            let ber_ci = stats
                .ber_ci95
                .map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
            let _ = writeln!(
                out,
                "{:<14} {:<18} {:>13.6e} {:>12.4e} {:>12} {:>12} {:>8.3} {:>9.3}",
                point.sweep_value.to_string(),
                stats.scheme.label(),
                stats.mean_mse,
                stats.mse_ci95,
                ber,
                ber_ci,
                stats.mean_selected,
                stats.seconds,
            );
        }
    }
    out
}
