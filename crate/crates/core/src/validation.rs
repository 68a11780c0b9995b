//! Self-check suites for the numerical core.
//!
//! Each suite sweeps a grid of randomized setups, measures how far two
//! independently computed quantities drift apart, and reports the worst
//! case. They back the test suite and are available to callers who want
//! to re-run the checks in their own environment.

use crate::channel::{draw_network, AntennaPair, NetworkConfig, TrialRng};
use crate::linalg::{
    hermitian_inverse, rank_one_update_inverse, ComplexMatrix, ComplexVector,
};
use crate::link::{build_link, equivalent_link, mse_direct, wiener_filter};
use crate::selection::{incremental_mse, SelectionState};
use std::fmt;

/// Outcome of one check suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed discrepancy, measured per the suite's own
    /// metric (relative error or residual norm).
    pub max_error: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, {} failures, max error {:.3e} (tolerance {:.1e})",
            self.name, self.cases, self.failures, self.max_error, self.tolerance
        )
    }
}

/// Checks that rank-one update scoring matches the from-scratch MSE.
///
/// For every combination of antenna counts in {2, 4} (square source and
/// destination), relay counts in {4, 8}, SNRs in {5, 20} dB applied to
/// both hops, and selection levels 0 through 3, the suite builds a
/// fixed selection, scores one further candidate incrementally, and
/// recomputes the same augmented link directly. The reported error is
/// the largest relative gap, compared against `tolerance`.
pub fn incremental_equivalence_suite(
    seed: u64,
    trials_per_case: u64,
    tolerance: f64,
) -> SuiteReport {
    let mut cases = 0;
    let mut failures = 0;
    let mut max_error: f64 = 0.0;

    for antennas in [2usize, 4] {
        for relays in [4usize, 8] {
            for snr_db in [5.0f64, 20.0] {
                let power = 10f64.powf(snr_db / 10.0);
                let config = NetworkConfig::new(antennas, antennas, 2, relays, power, power)
                    .expect("grid parameters are valid");
                for level in 0..=3usize {
                    for trial in 0..trials_per_case {
                        let channels = draw_network(&config, seed, trial);
                        let pairs: Vec<AntennaPair> = (0..level)
                            .map(|relay| AntennaPair {
                                relay,
                                backward_antenna: (trial as usize + relay) % config.nr(),
                                forward_antenna: (trial as usize + relay + 1) % config.nr(),
                            })
                            .collect();
                        let state = SelectionState::from_pairs(&channels, &config, &pairs)
                            .expect("fixed selections on random draws are regular");
                        let candidate = AntennaPair {
                            relay: level,
                            backward_antenna: trial as usize % config.nr(),
                            forward_antenna: (trial as usize + 1) % config.nr(),
                        };

                        let fast = incremental_mse(
                            &state,
                            candidate,
                            &channels,
                            config.sigma_x2(),
                            config.relay_local_power(),
                        )
                        .expect("random candidates are regular");

                        let mut augmented = pairs.clone();
                        augmented.push(candidate);
                        let link = build_link(
                            &channels,
                            &augmented,
                            config.sigma_x2(),
                            config.relay_local_power(),
                        )
                        .expect("augmented selection uses distinct relays");
                        let direct =
                            mse_direct(&equivalent_link(&link), config.ns(), config.nd(), false)
                                .expect("noise covariance is positive definite");

                        let error = (fast - direct).abs() / direct.abs().max(f64::MIN_POSITIVE);
                        max_error = max_error.max(error);
                        cases += 1;
                        if !(error <= tolerance) {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }

    SuiteReport {
        name: "incremental vs direct MSE",
        cases,
        failures,
        max_error,
        tolerance,
    }
}

fn random_vector(rng: &mut TrialRng, len: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(len);
    for i in 0..len {
        v.set(i, rng.standard_complex_gaussian());
    }
    v
}

/// Checks rank-one inverse updates by residual: for random positive
/// definite `A` and random vectors `x`, `y`, the updated inverse must
/// satisfy `(A + x y^H) B = I` to within the tolerance, including the
/// Hermitian special case `y = x`.
pub fn sherman_morrison_suite(seed: u64, trials_per_size: u64) -> SuiteReport {
    const TOLERANCE: f64 = 1e-9;
    let mut cases = 0;
    let mut failures = 0;
    let mut max_error: f64 = 0.0;

    for size in [1usize, 2, 3, 4, 6] {
        for trial in 0..trials_per_size {
            let mut rng = TrialRng::fading(seed, trial + 1000 * size as u64);
            let raw = ComplexMatrix::from_fn(size, size, |_, _| rng.standard_complex_gaussian());
            let a = raw
                .matmul(&raw.hermitian())
                .add(&ComplexMatrix::identity(size));
            let a_inv = hermitian_inverse(&a).expect("A is positive definite by construction");

            for hermitian_case in [false, true] {
                let x = random_vector(&mut rng, size);
                let y = if hermitian_case {
                    x.clone()
                } else {
                    random_vector(&mut rng, size)
                };
                let updated_inv = match rank_one_update_inverse(&a_inv, &x, &y) {
                    Ok(m) => m,
                    // Random updates are singular with probability zero;
                    // count a hit as a failure rather than skipping it.
                    Err(_) => {
                        cases += 1;
                        failures += 1;
                        continue;
                    }
                };
                let mut updated = a.clone();
                for r in 0..size {
                    for c in 0..size {
                        let bump = x.get(r) * y.get(c).conj();
                        updated.set(r, c, updated.get(r, c) + bump);
                    }
                }
                let residual = updated
                    .matmul(&updated_inv)
                    .sub(&ComplexMatrix::identity(size))
                    .norm_max();
                max_error = max_error.max(residual);
                cases += 1;
                if !(residual <= TOLERANCE) {
                    failures += 1;
                }
            }
        }
    }

    SuiteReport {
        name: "rank-one inverse update residuals",
        cases,
        failures,
        max_error,
        tolerance: TOLERANCE,
    }
}

/// Checks the closed-form MSE against a Monte Carlo estimate of the
/// Wiener filter's error with Gaussian symbols.
///
/// For each random network draw, the suite selects the first
/// `multiplexing_gain` relays with fixed antennas, computes the
/// closed-form MSE (dimension term included), and estimates
/// `E ||x - F y||^2` by sending `draws` Gaussian symbol vectors through
/// the link with fresh noise. The metric is the relative gap between
/// the two, so the tolerance must cover Monte Carlo error.
pub fn wiener_agreement_suite(seed: u64, trials: u64, draws: u64, tolerance: f64) -> SuiteReport {
    let mut cases = 0;
    let mut failures = 0;
    let mut max_error: f64 = 0.0;

    for trial in 0..trials {
        let config = NetworkConfig::new(2, 2, 2, 4, 10f64.powf(0.5), 10f64.powf(0.5))
            .expect("fixed parameters are valid");
        let channels = draw_network(&config, seed, trial);
        let pairs: Vec<AntennaPair> = (0..config.multiplexing_gain())
            .map(|relay| AntennaPair {
                relay,
                backward_antenna: trial as usize % config.nr(),
                forward_antenna: (trial as usize + relay) % config.nr(),
            })
            .collect();
        let link = build_link(
            &channels,
            &pairs,
            config.sigma_x2(),
            config.relay_local_power(),
        )
        .expect("distinct relays by construction");
        let eq = equivalent_link(&link);
        let closed_form = mse_direct(&eq, config.ns(), config.nd(), true)
            .expect("noise covariance is positive definite");
        let filter = wiener_filter(&eq).expect("noise covariance is positive definite");

        let sigma = config.sigma_x2().sqrt();
        let mut rng = TrialRng::transmission(seed, trial);
        let mut total = 0.0;
        for _ in 0..draws {
            let mut x = ComplexVector::zeros(config.ns());
            for i in 0..config.ns() {
                x.set(i, rng.standard_complex_gaussian() * sigma);
            }
            let mut y = eq.h_eq().matvec(&x);
            let mut relay_noise = ComplexVector::zeros(pairs.len());
            for i in 0..pairs.len() {
                relay_noise.set(i, rng.standard_complex_gaussian());
            }
            let relayed = eq.gw().matvec(&relay_noise);
            for i in 0..config.nd() {
                y.set(i, y.get(i) + relayed.get(i) + rng.standard_complex_gaussian());
            }
            let estimate = filter.matvec(&y);
            let mut err = 0.0;
            for i in 0..config.ns() {
                err += (x.get(i) - estimate.get(i)).norm_sqr();
            }
            total += err;
        }
        let empirical = total / draws as f64;

        let error = (empirical - closed_form).abs() / closed_form;
        max_error = max_error.max(error);
        cases += 1;
        if !(error <= tolerance) {
            failures += 1;
        }
    }

    SuiteReport {
        name: "closed-form vs empirical Wiener MSE",
        cases,
        failures,
        max_error,
        tolerance,
    }
}
