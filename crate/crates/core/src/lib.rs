//! Link-level simulation of antenna selection in two-hop
//! amplify-and-forward MIMO relay networks.
//!
//! A source with `ns` antennas reaches a destination with `nd >= ns`
//! antennas through `k` half-duplex relays, each carrying `nr` receive
//! and `nr` transmit antennas and no direct source-destination path.
//! Every relay contributes at most one receive/transmit antenna pair;
//! picking the set of pairs shapes the equivalent link the destination's
//! Wiener filter sees, and the selection schemes in [`selection`] trade
//! off link MSE against search cost:
//!
//! * greedy MSE-minimum selection, scored in O(nd^2) per candidate
//!   through rank-one inverse updates, with an optional global power
//!   constraint,
//! * two channel-norm heuristics picking exactly `min(ns, nd)` pairs,
//! * budget-guarded exhaustive search.
//!
//! [`experiment`] wraps the schemes in reproducible Monte Carlo sweeps
//! (MSE, QPSK bit error rate, selected-set histograms); [`validation`]
//! re-derives the core identities numerically. All randomness flows
//! from a single seed through counter-addressed streams, so every
//! result is reproducible bit for bit at any parallelism level.

pub mod channel;
pub mod experiment;
pub mod linalg;
pub mod link;
pub mod selection;
pub mod validation;

pub use channel::{
    candidate_pairs, draw_network, AntennaPair, ChannelRealization, ConfigError, NetworkConfig,
    TrialRng,
};
pub use experiment::{
    run_ber_experiment, run_mse_experiment, run_scheme, run_selection_histogram, summarize,
    ExperimentConfig, ExperimentError, ExperimentResult, PointResult, SchemeStats, Sweep,
    SweepValue,
};
pub use linalg::{ComplexMatrix, ComplexVector, LinalgError};
pub use link::{
    build_link, equivalent_link, mse_direct, relay_gain, transmit_qpsk, wiener_filter,
    EquivalentLink, LinkError, QpskTransmission, SelectedLink,
};
pub use selection::{
    apply_global_power_constraint, dors_select, exhaustive_select, exhaustive_trial_count,
    gmm_select, incremental_mse, so_select, Scheme, SelectionError, SelectionResult,
    SelectionState, DEFAULT_EXHAUSTIVE_BUDGET,
};
pub use validation::{
    incremental_equivalence_suite, sherman_morrison_suite, wiener_agreement_suite, SuiteReport,
};
