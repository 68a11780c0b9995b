//! JSON experiment configuration.

use crate::CliError;
use afrelay_core::{ExperimentConfig, NetworkConfig, Scheme, Sweep, DEFAULT_EXHAUSTIVE_BUDGET};
use serde::Deserialize;
use std::path::Path;

fn default_db() -> f64 {
    5.0
}

fn default_trials() -> u64 {
    100
}

fn default_schemes() -> Vec<String> {
    vec!["gmm".into(), "dors".into(), "so".into()]
}

fn default_seed() -> u64 {
    1
}

fn default_symbols() -> u64 {
    200
}

fn default_budget() -> u64 {
    DEFAULT_EXHAUSTIVE_BUDGET
}

/// One configuration document drives every subcommand; each subcommand
/// reads the fields it needs and rejects documents missing them.
/// Unknown keys are rejected by name.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Source antenna count.
    pub ns: usize,
    /// Destination antenna count.
    pub nd: usize,
    /// Antennas per relay side.
    pub nr: usize,
    /// Fixed relay count, for SNR sweeps and trial counting.
    #[serde(default)]
    pub k: Option<usize>,
    /// Relay counts to sweep.
    #[serde(default)]
    pub k_list: Option<Vec<usize>>,
    /// Source SNRs in dB to sweep.
    #[serde(default)]
    pub snr_db_list: Option<Vec<f64>>,
    /// Source power in dB over the unit noise power.
    #[serde(default = "default_db")]
    pub ps_db: f64,
    /// Per-relay transmit power in dB over the unit noise power.
    #[serde(default = "default_db")]
    pub ploc_db: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Scheme labels: gmm, gmm-global-power, dors, so, exhaustive.
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// QPSK symbol vectors per trial in detection runs.
    #[serde(default = "default_symbols")]
    pub symbols_per_trial: u64,
    /// Trial cap for the exhaustive scheme.
    #[serde(default = "default_budget")]
    pub exhaustive_budget: u64,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl FileConfig {
    /// Reads a JSON document, applies `key=value` overrides onto its top
    /// level, then deserializes. Override values are parsed as JSON and
    /// fall back to plain strings, so `--set k_list=[4,8]` and
    /// `--set schemes=["gmm"]` work alongside `--set trials=50`.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| CliError::Config(format!("cannot read config {}: {err}", path.display())))?;
        let mut doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|err| CliError::Config(format!("cannot parse config {}: {err}", path.display())))?;
        let map = doc
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("config {} must be a JSON object", path.display())))?;
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| {
                CliError::Config(format!("override '{item}' is not of the form key=value"))
            })?;
            let value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.to_string(), value);
        }
        serde_json::from_value(doc)
            .map_err(|err| CliError::Config(format!("invalid config {}: {err}", path.display())))
    }

    /// The network at a given relay count, with powers converted from dB.
    pub fn network(&self, relay_count: usize) -> Result<NetworkConfig, CliError> {
        NetworkConfig::new(
            self.ns,
            self.nd,
            self.nr,
            relay_count,
            db_to_linear(self.ps_db),
            db_to_linear(self.ploc_db),
        )
        .map_err(|err| CliError::Config(err.to_string()))
    }

    /// Relay counts to sweep; requires a nonempty `k_list`.
    pub fn sweep_relay_counts(&self) -> Result<Vec<usize>, CliError> {
        match &self.k_list {
            Some(list) if !list.is_empty() => Ok(list.clone()),
            _ => Err(CliError::Config(
                "a nonempty k_list is required for relay-count sweeps".into(),
            )),
        }
    }

    /// SNRs to sweep; requires a nonempty `snr_db_list`.
    pub fn sweep_snr_dbs(&self) -> Result<Vec<f64>, CliError> {
        match &self.snr_db_list {
            Some(list) if !list.is_empty() => Ok(list.clone()),
            _ => Err(CliError::Config(
                "a nonempty snr_db_list is required for SNR sweeps".into(),
            )),
        }
    }

    /// The relay count for experiments that do not sweep it: `k`, or a
    /// single-entry `k_list`.
    pub fn fixed_relay_count(&self) -> Result<usize, CliError> {
        if let Some(k) = self.k {
            return Ok(k);
        }
        if let Some(list) = &self.k_list {
            if list.len() == 1 {
                return Ok(list[0]);
            }
        }
        Err(CliError::Config(
            "a fixed relay count is required: set k, or a single-entry k_list".into(),
        ))
    }

    /// Relay counts for trial counting: `k_list` if present, else `k`.
    pub fn counted_relay_counts(&self) -> Result<Vec<usize>, CliError> {
        if let Some(list) = &self.k_list {
            if !list.is_empty() {
                return Ok(list.clone());
            }
        }
        if let Some(k) = self.k {
            return Ok(vec![k]);
        }
        Err(CliError::Config("set k or k_list to count trials".into()))
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>, CliError> {
        if self.schemes.is_empty() {
            return Err(CliError::Config("schemes must not be empty".into()));
        }
        self.schemes
            .iter()
            .map(|label| label.parse::<Scheme>().map_err(CliError::Config))
            .collect()
    }

    /// Assembles the experiment description around a prepared sweep.
    pub fn experiment(
        &self,
        sweep: Sweep,
        base_relay_count: usize,
        seed_override: Option<u64>,
        workers: Option<usize>,
    ) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::new(self.network(base_relay_count)?, sweep);
        config.schemes = self.schemes()?;
        config.trials = self.trials;
        config.seed = seed_override.unwrap_or(self.seed);
        config.symbol_blocks_per_trial = self.symbols_per_trial;
        config.budget = self.exhaustive_budget;
        config.workers = workers;
        Ok(config)
    }
}
