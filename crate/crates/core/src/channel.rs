//! Network configuration and fading realization for a two-hop relay network.
//!
//! A source with `ns` antennas reaches a destination with `nd` antennas
//! through `k` half-duplex amplify-and-forward relays of `nr` antennas
//! each. There is no direct source-destination path. Channels are
//! uncorrelated Rayleigh: every entry is an independent zero-mean
//! circularly symmetric complex Gaussian with unit variance.

use crate::linalg::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("antenna and relay counts must be at least 1 (ns={ns}, nd={nd}, nr={nr}, k={k})")]
    NonPositiveCount { ns: usize, nd: usize, nr: usize, k: usize },
    #[error("power budgets must be positive and finite (ps={ps}, ploc={ploc})")]
    NonPositivePower { ps: f64, ploc: f64 },
    #[error("destination needs at least as many antennas as the source (ns={ns}, nd={nd})")]
    DestinationTooSmall { ns: usize, nd: usize },
}

/// Validated antenna counts and power budgets for one network.
///
/// `ps` is the total source transmit power, spread evenly over the `ns`
/// transmit antennas, and `ploc` is the local power budget of each
/// activated relay. Both are linear (not dB) quantities. Noise variance
/// is normalized to 1 at every receive antenna, so `ps` doubles as the
/// source-side SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkConfig {
    ns: usize,
    nd: usize,
    nr: usize,
    k: usize,
    ps: f64,
    ploc: f64,
}

impl NetworkConfig {
    pub fn new(
        ns: usize,
        nd: usize,
        nr: usize,
        k: usize,
        ps: f64,
        ploc: f64,
    ) -> Result<Self, ConfigError> {
        if ns == 0 || nd == 0 || nr == 0 || k == 0 {
            return Err(ConfigError::NonPositiveCount { ns, nd, nr, k });
        }
        if !(ps > 0.0 && ps.is_finite()) || !(ploc > 0.0 && ploc.is_finite()) {
            return Err(ConfigError::NonPositivePower { ps, ploc });
        }
        if nd < ns {
            return Err(ConfigError::DestinationTooSmall { ns, nd });
        }
        Ok(Self { ns, nd, nr, k, ps, ploc })
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn nd(&self) -> usize {
        self.nd
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn relay_count(&self) -> usize {
        self.k
    }

    pub fn source_power(&self) -> f64 {
        self.ps
    }

    pub fn relay_local_power(&self) -> f64 {
        self.ploc
    }

    /// Number of independent spatial streams, `min(ns, nd)`.
    pub fn multiplexing_gain(&self) -> usize {
        self.ns.min(self.nd)
    }

    /// Per-antenna source symbol variance `ps / ns`.
    pub fn sigma_x2(&self) -> f64 {
        self.ps / self.ns as f64
    }

    /// Same network with a different relay count, for sweeps over `k`.
    pub fn with_relay_count(&self, k: usize) -> Result<Self, ConfigError> {
        Self::new(self.ns, self.nd, self.nr, k, self.ps, self.ploc)
    }

    /// Same network with a different source power, for sweeps over SNR.
    pub fn with_source_power(&self, ps: f64) -> Result<Self, ConfigError> {
        Self::new(self.ns, self.nd, self.nr, self.k, ps, self.ploc)
    }
}

/// One antenna pair at one relay: receive (backward) antenna `m`,
/// transmit (forward) antenna `n`. Derives `Ord` so that sorting agrees
/// with the canonical `(relay, backward, forward)` candidate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AntennaPair {
    pub relay: usize,
    pub backward_antenna: usize,
    pub forward_antenna: usize,
}

/// Every candidate antenna pair of the network, ordered by
/// `(relay, backward, forward)`. There are `k * nr * nr` of them.
pub fn candidate_pairs(config: &NetworkConfig) -> Vec<AntennaPair> {
    let mut pairs = Vec::with_capacity(config.k * config.nr * config.nr);
    for relay in 0..config.k {
        for backward_antenna in 0..config.nr {
            for forward_antenna in 0..config.nr {
                pairs.push(AntennaPair {
                    relay,
                    backward_antenna,
                    forward_antenna,
                });
            }
        }
    }
    pairs
}

/// Fading matrices of every relay for one Monte Carlo trial.
///
/// `backward[k]` is the `nr x ns` source-to-relay matrix of relay `k`;
/// `forward[k]` is the `nd x nr` relay-to-destination matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    backward: Vec<ComplexMatrix>,
    forward: Vec<ComplexMatrix>,
}

impl ChannelRealization {
    /// Builds a realization from explicit matrices, one backward and one
    /// forward matrix per relay. Useful for hand-crafted scenarios;
    /// Monte Carlo draws come from [`draw_network`].
    pub fn from_matrices(backward: Vec<ComplexMatrix>, forward: Vec<ComplexMatrix>) -> Self {
        assert_eq!(backward.len(), forward.len(), "one matrix pair per relay");
        assert!(!backward.is_empty(), "a realization needs at least one relay");
        for m in &backward {
            assert_eq!(
                (m.rows(), m.cols()),
                (backward[0].rows(), backward[0].cols()),
                "backward matrices must share a shape"
            );
        }
        for m in &forward {
            assert_eq!(
                (m.rows(), m.cols()),
                (forward[0].rows(), forward[0].cols()),
                "forward matrices must share a shape"
            );
        }
        Self { backward, forward }
    }

    pub fn relay_count(&self) -> usize {
        self.backward.len()
    }

    pub fn backward(&self, relay: usize) -> &ComplexMatrix {
        &self.backward[relay]
    }

    pub fn forward(&self, relay: usize) -> &ComplexMatrix {
        &self.forward[relay]
    }

    /// Row of the backward matrix seen by the pair's receive antenna,
    /// length `ns`.
    pub fn backward_row(&self, pair: AntennaPair) -> ComplexVector {
        self.backward[pair.relay].row_vector(pair.backward_antenna)
    }

    /// Column of the forward matrix driven by the pair's transmit
    /// antenna, length `nd`.
    pub fn forward_col(&self, pair: AntennaPair) -> ComplexVector {
        self.forward[pair.relay].col_vector(pair.forward_antenna)
    }
}

const LANE_FADING: u64 = 0;
const LANE_TRANSMISSION: u64 = 1;

/// Deterministic per-trial random stream.
///
/// Each `(seed, trial, lane)` triple keys a distinct ChaCha stream, so
/// trials can run on any number of workers in any order and still
/// reproduce bit-identical draws. The fading lane feeds
/// [`draw_network`]; the transmission lane feeds symbol and noise draws
/// so that adding transmissions to a trial never perturbs its channels.
pub struct TrialRng {
    inner: ChaCha12Rng,
}

impl TrialRng {
    fn with_lane(seed: u64, trial: u64, lane: u64) -> Self {
        assert!(trial < 1 << 62, "trial index exceeds the stream space");
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream((lane << 62) | trial);
        Self { inner }
    }

    pub fn fading(seed: u64, trial: u64) -> Self {
        Self::with_lane(seed, trial, LANE_FADING)
    }

    pub fn transmission(seed: u64, trial: u64) -> Self {
        Self::with_lane(seed, trial, LANE_TRANSMISSION)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Zero-mean circularly symmetric complex Gaussian with unit
    /// variance, via one Box-Muller transform: each draw consumes
    /// exactly two uniforms.
    pub fn standard_complex_gaussian(&mut self) -> Complex64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        // Real and imaginary parts each carry variance 1/2.
        let scale = radius * std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(scale * angle.cos(), scale * angle.sin())
    }
}

/// Draws the fading realization of trial `trial` under the given seed.
///
/// The draw order is fixed: backward matrices of relays `0..k` row by
/// row, then forward matrices of relays `0..k` row by row.
pub fn draw_network(config: &NetworkConfig, seed: u64, trial: u64) -> ChannelRealization {
    let mut rng = TrialRng::fading(seed, trial);
    let backward = (0..config.k)
        .map(|_| ComplexMatrix::from_fn(config.nr, config.ns, |_, _| rng.standard_complex_gaussian()))
        .collect();
    let forward = (0..config.k)
        .map(|_| ComplexMatrix::from_fn(config.nd, config.nr, |_, _| rng.standard_complex_gaussian()))
        .collect();
    ChannelRealization { backward, forward }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(ns: usize, nd: usize, nr: usize, k: usize) -> NetworkConfig {
        NetworkConfig::new(ns, nd, nr, k, 4.0, 2.0).unwrap()
    }

    #[test]
    fn rejects_destination_smaller_than_source() {
        assert!(matches!(
            NetworkConfig::new(4, 2, 2, 8, 1.0, 1.0),
            Err(ConfigError::DestinationTooSmall { ns: 4, nd: 2 })
        ));
    }

    #[test]
    fn rejects_zero_counts_and_nonpositive_power() {
        assert!(matches!(
            NetworkConfig::new(0, 2, 2, 8, 1.0, 1.0),
            Err(ConfigError::NonPositiveCount { .. })
        ));
        assert!(matches!(
            NetworkConfig::new(2, 2, 2, 8, 0.0, 1.0),
            Err(ConfigError::NonPositivePower { .. })
        ));
        assert!(matches!(
            NetworkConfig::new(2, 2, 2, 8, 1.0, f64::NAN),
            Err(ConfigError::NonPositivePower { .. })
        ));
    }

    #[test]
    fn sigma_x2_splits_source_power_evenly() {
        let cfg = NetworkConfig::new(4, 4, 2, 8, 10.0, 2.0).unwrap();
        assert_eq!(cfg.sigma_x2(), 2.5);
        assert_eq!(cfg.multiplexing_gain(), 4);
    }

    #[test]
    fn candidate_pairs_are_complete_and_ordered() {
        let pairs = candidate_pairs(&config(4, 4, 2, 8));
        assert_eq!(pairs.len(), 32);
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);

        let pairs = candidate_pairs(&config(2, 2, 2, 3));
        assert_eq!(pairs.len(), 12);
        for relay in 0..3 {
            assert_eq!(pairs.iter().filter(|p| p.relay == relay).count(), 4);
        }
    }

    #[test]
    fn draws_have_configured_shapes() {
        let cfg = config(4, 5, 2, 3);
        let ch = draw_network(&cfg, 7, 0);
        assert_eq!(ch.relay_count(), 3);
        for k in 0..3 {
            assert_eq!((ch.backward(k).rows(), ch.backward(k).cols()), (2, 4));
            assert_eq!((ch.forward(k).rows(), ch.forward(k).cols()), (5, 2));
        }
        assert_eq!(ch.backward_row(AntennaPair { relay: 1, backward_antenna: 1, forward_antenna: 0 }).len(), 4);
        assert_eq!(ch.forward_col(AntennaPair { relay: 1, backward_antenna: 1, forward_antenna: 0 }).len(), 5);
    }

    #[test]
    fn same_key_reproduces_same_draw() {
        let cfg = config(4, 4, 2, 8);
        let a = draw_network(&cfg, 42, 13);
        let b = draw_network(&cfg, 42, 13);
        assert_eq!(a, b);
    }

    #[test]
    fn different_trials_and_seeds_differ() {
        let cfg = config(4, 4, 2, 8);
        let a = draw_network(&cfg, 42, 13);
        let b = draw_network(&cfg, 42, 14);
        let c = draw_network(&cfg, 43, 13);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn transmission_lane_is_distinct_from_fading_lane() {
        let mut fading = TrialRng::fading(9, 5);
        let mut tx = TrialRng::transmission(9, 5);
        let a: Vec<_> = (0..8).map(|_| fading.inner.next_u64()).collect();
        let b: Vec<_> = (0..8).map(|_| tx.inner.next_u64()).collect();
        assert_ne!(a, b);
    }
}
