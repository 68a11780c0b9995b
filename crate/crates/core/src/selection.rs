//! Antenna-pair selection schemes.
//!
//! The centerpiece is greedy MSE-minimum selection ([`gmm_select`]): at
//! each level it scores every remaining candidate pair by the exact MSE
//! the augmented link would have, accepts the best one while the MSE
//! still improves, and retires the chosen relay. Scoring uses
//! [`incremental_mse`], which reuses the current level's inverse through
//! two Sherman-Morrison updates instead of refactorizing, so a full
//! round costs O(candidates * nd^2).
//!
//! Two reference schemes pick exactly `min(ns, nd)` pairs: [`dors_select`]
//! ranks candidates by a harmonic mean of their per-hop strengths, and
//! [`so_select`] seeds with that metric and then favors candidates whose
//! sub-channels are as non-parallel as possible to the ones already
//! chosen. [`exhaustive_select`] is the budget-guarded brute-force
//! reference.

use crate::channel::{candidate_pairs, AntennaPair, ChannelRealization, NetworkConfig};
use crate::linalg::{
    hermitian_inverse, rank_one_update_inverse, trace_of_product_real, ComplexMatrix,
    ComplexVector, LinalgError,
};
use crate::link::{build_link, equivalent_link, mse_direct, relay_gain, LinkError};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default cap on exhaustive-search trials.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("scheme needs {required} relays, network has {available}")]
    InsufficientRelays { available: usize, required: usize },
    #[error("exhaustive search needs {required} trials, budget allows {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("exhaustive trial count overflows a 64-bit integer")]
    CountOverflow,
    #[error("level cap {l_max} exceeds the relay count {relays}")]
    InvalidLevelCap { l_max: usize, relays: usize },
    #[error(transparent)]
    Numerical(#[from] LinalgError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// Selection scheme identifiers, also used as CSV labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Greedy MSE-minimum selection at full per-relay power.
    Gmm,
    /// Greedy selection rescaled to the total power budget of
    /// `multiplexing_gain` relays.
    GmmGlobalPower,
    /// Harmonic-mean ranking of per-hop channel strengths.
    Dors,
    /// Semi-orthogonal selection by accumulated sub-channel angles.
    SemiOrthogonal,
    /// Brute-force minimum over all admissible pair sets.
    Exhaustive,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Gmm,
        Scheme::GmmGlobalPower,
        Scheme::Dors,
        Scheme::SemiOrthogonal,
        Scheme::Exhaustive,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Gmm => "gmm",
            Scheme::GmmGlobalPower => "gmm-global-power",
            Scheme::Dors => "dors",
            Scheme::SemiOrthogonal => "so",
            Scheme::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "gmm" => Ok(Scheme::Gmm),
            "gmm-global-power" => Ok(Scheme::GmmGlobalPower),
            "dors" => Ok(Scheme::Dors),
            "so" | "semi-orthogonal" => Ok(Scheme::SemiOrthogonal),
            "exhaustive" => Ok(Scheme::Exhaustive),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

/// Output of any selection scheme.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    /// Accepted pairs in acceptance order (enumeration order for the
    /// exhaustive scheme). Relays are pairwise distinct.
    pub pairs: Vec<AntennaPair>,
    pub scheme: Scheme,
    /// MSE of the final link, beta term omitted.
    pub mse: f64,
    /// MSE after each accepted pair, so `mse_trace.len() == pairs.len()`
    /// and the last entry equals `mse`.
    pub mse_trace: Vec<f64>,
    /// Per-relay power the gains were computed with.
    pub per_relay_power_used: f64,
}

impl SelectionResult {
    /// Number of selected pairs.
    pub fn level(&self) -> usize {
        self.pairs.len()
    }
}

/// Greedy selection state after `level()` accepted pairs.
///
/// Keeps the stacked channels `h_l`, `g_l`, the gain diagonal `w_l`, the
/// cached product `g_l W_l h_l`, the noise covariance `phi_l`, the MSE
/// kernel `a_l = phi_l + sigma_x2 (G W H)(G W H)^H` with its inverse,
/// the accepted-MSE trace, and the not-yet-retired candidates.
#[derive(Clone, Debug)]
pub struct SelectionState {
    pairs: Vec<AntennaPair>,
    h_l: ComplexMatrix,
    g_l: ComplexMatrix,
    w_l: Vec<f64>,
    gwh_l: ComplexMatrix,
    phi_l: ComplexMatrix,
    a_l: ComplexMatrix,
    a_l_inv: ComplexMatrix,
    mse_trace: Vec<f64>,
    remaining: Vec<AntennaPair>,
}

impl SelectionState {
    /// Level-zero state: empty selection, identity covariance, every
    /// candidate pair available.
    pub fn initial(config: &NetworkConfig) -> Self {
        let nd = config.nd();
        let identity = ComplexMatrix::identity(nd);
        Self {
            pairs: Vec::new(),
            h_l: ComplexMatrix::zeros(0, config.ns()),
            g_l: ComplexMatrix::zeros(nd, 0),
            w_l: Vec::new(),
            gwh_l: ComplexMatrix::zeros(nd, config.ns()),
            phi_l: identity.clone(),
            a_l: identity.clone(),
            a_l_inv: identity,
            mse_trace: Vec::new(),
            remaining: candidate_pairs(config),
        }
    }

    /// State holding the given accepted pairs, with all level matrices
    /// computed from scratch. The MSE trace is filled with the direct
    /// MSE of each prefix.
    pub fn from_pairs(
        channels: &ChannelRealization,
        config: &NetworkConfig,
        pairs: &[AntennaPair],
    ) -> Result<Self, SelectionError> {
        let mut state = Self::initial(config);
        let sigma_x2 = config.sigma_x2();
        let ploc = config.relay_local_power();
        for (i, &pair) in pairs.iter().enumerate() {
            let link = build_link(channels, &pairs[..=i], sigma_x2, ploc)?;
            let q = mse_direct(&equivalent_link(&link), config.ns(), config.nd(), false)?;
            state.accept(pair, q, channels, sigma_x2, ploc)?;
        }
        Ok(state)
    }

    pub fn level(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[AntennaPair] {
        &self.pairs
    }

    pub fn w_l(&self) -> &[f64] {
        &self.w_l
    }

    pub fn phi_l(&self) -> &ComplexMatrix {
        &self.phi_l
    }

    pub fn a_l(&self) -> &ComplexMatrix {
        &self.a_l
    }

    pub fn a_l_inv(&self) -> &ComplexMatrix {
        &self.a_l_inv
    }

    pub fn mse_trace(&self) -> &[f64] {
        &self.mse_trace
    }

    pub fn remaining(&self) -> &[AntennaPair] {
        &self.remaining
    }

    /// Appends an accepted pair and rebuilds the level matrices from the
    /// accumulated channels: `phi = I + G W^2 G^H`,
    /// `a = phi + sigma_x2 (G W H)(G W H)^H`, and its inverse.
    fn accept(
        &mut self,
        pair: AntennaPair,
        mse: f64,
        channels: &ChannelRealization,
        sigma_x2: f64,
        ploc: f64,
    ) -> Result<(), SelectionError> {
        debug_assert!(
            !self.pairs.iter().any(|p| p.relay == pair.relay),
            "accepted relay already in use"
        );
        let h_row = channels.backward_row(pair);
        let g_col = channels.forward_col(pair);
        let w = relay_gain(&h_row, sigma_x2, ploc);
        let level = self.level();

        let mut h_l = ComplexMatrix::zeros(level + 1, self.h_l.cols());
        for r in 0..level {
            h_l.set_row(r, &self.h_l.row_vector(r));
        }
        h_l.set_row(level, &h_row);

        let mut g_l = ComplexMatrix::zeros(self.g_l.rows(), level + 1);
        for c in 0..level {
            g_l.set_col(c, &self.g_l.col_vector(c));
        }
        g_l.set_col(level, &g_col);

        self.w_l.push(w);
        self.h_l = h_l;
        self.g_l = g_l;

        let gw = self.g_l.scale_cols(&self.w_l);
        self.gwh_l = gw.matmul(&self.h_l);
        self.phi_l = gw
            .matmul(&gw.hermitian())
            .add(&ComplexMatrix::identity(self.g_l.rows()));
        self.a_l = self
            .phi_l
            .add(&self.gwh_l.matmul(&self.gwh_l.hermitian()).scale(sigma_x2));
        self.a_l_inv = hermitian_inverse(&self.a_l)?;

        self.pairs.push(pair);
        self.mse_trace.push(mse);
        self.remaining.retain(|p| p.relay != pair.relay);
        Ok(())
    }

    fn into_result(self, scheme: Scheme, sigma_x2: f64, nd: usize, per_relay_power: f64) -> SelectionResult {
        let mse = self
            .mse_trace
            .last()
            .copied()
            .unwrap_or(sigma_x2 * nd as f64);
        SelectionResult {
            pairs: self.pairs,
            scheme,
            mse,
            mse_trace: self.mse_trace,
            per_relay_power_used: per_relay_power,
        }
    }
}

/// Exact MSE of the link augmented by `candidate`, in O(nd^2).
///
/// With `p = g_l W_l h_l`, the candidate's backward row `h`, forward
/// column `g`, and gain `w`, the augmented MSE kernel is
/// `c = a_l + u g^H + g v^H` where
///
/// `u = sigma_x2 w p h^H + w^2 g` and `v = sigma_x2 w p h^H + sigma_x2 w^2 |h|^2 g`.
///
/// Both rank-one terms go through [`rank_one_update_inverse`], and the
/// returned value is `sigma_x2 tr((phi_l + w^2 g g^H) c^-1)`. Candidates
/// whose update denominators vanish surface as
/// [`LinalgError::UpdateSingular`]; the greedy loop skips them.
pub fn incremental_mse(
    state: &SelectionState,
    candidate: AntennaPair,
    channels: &ChannelRealization,
    sigma_x2: f64,
    ploc: f64,
) -> Result<f64, SelectionError> {
    debug_assert!(
        !state.pairs.iter().any(|p| p.relay == candidate.relay),
        "candidate relay already selected"
    );
    let h = channels.backward_row(candidate);
    let g = channels.forward_col(candidate);
    let w = relay_gain(&h, sigma_x2, ploc);
    let h_norm_sq = h.norm_sq();

    // p h^H, reused by both update vectors.
    let ph = state.gwh_l.matvec(&h.conj());
    let nd = g.len();
    let mut u = ComplexVector::zeros(nd);
    let mut v = ComplexVector::zeros(nd);
    for i in 0..nd {
        let common = ph.get(i) * (sigma_x2 * w);
        u.set(i, common + g.get(i) * (w * w));
        v.set(i, common + g.get(i) * (sigma_x2 * w * w * h_norm_sq));
    }

    let b_inv = rank_one_update_inverse(&state.a_l_inv, &u, &g)?;
    let c_inv = rank_one_update_inverse(&b_inv, &g, &v)?;

    let base = trace_of_product_real(&state.phi_l, &c_inv);
    let g_quad = g.conj_dot(&c_inv.matvec(&g)).re;
    Ok(sigma_x2 * (base + w * w * g_quad))
}

/// Greedy MSE-minimum selection.
///
/// Starts from the empty link, and in each round scores every remaining
/// candidate with [`incremental_mse`], taking the smallest (ties go to
/// the first candidate in `(relay, backward, forward)` order). The pair
/// is accepted while it strictly improves on the previous MSE; the first
/// non-improving round terminates the search. Each acceptance retires
/// all pairs of the chosen relay.
pub fn gmm_select(channels: &ChannelRealization, config: &NetworkConfig) -> SelectionResult {
    let sigma_x2 = config.sigma_x2();
    let ploc = config.relay_local_power();
    let mut state = SelectionState::initial(config);
    let mut previous_mse = f64::INFINITY;
    loop {
        let mut best: Option<(AntennaPair, f64)> = None;
        for &candidate in &state.remaining {
            match incremental_mse(&state, candidate, channels, sigma_x2, ploc) {
                Ok(q) => {
                    if best.map_or(true, |(_, best_q)| q < best_q) {
                        best = Some((candidate, q));
                    }
                }
                // A vanishing update denominator marks a degenerate
                // candidate; it simply drops out of this round.
                Err(SelectionError::Numerical(LinalgError::UpdateSingular { .. })) => {}
                Err(_) => unreachable!("incremental scoring only fails on singular updates"),
            }
        }
        match best {
            Some((pair, q)) if q < previous_mse => {
                state
                    .accept(pair, q, channels, sigma_x2, ploc)
                    .expect("a_l stays positive definite: it is I plus positive semidefinite terms");
                previous_mse = q;
            }
            _ => break,
        }
    }
    state.into_result(Scheme::Gmm, sigma_x2, config.nd(), ploc)
}

/// Harmonic mean `2ab / (a + b)` of the squared per-hop channel norms,
/// zero when both hops are dead.
fn harmonic_strength(channels: &ChannelRealization, pair: AntennaPair) -> f64 {
    let a = channels.backward_row(pair).norm_sq();
    let b = channels.forward_col(pair).norm_sq();
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

fn argmax_by_strength(
    channels: &ChannelRealization,
    candidates: &[AntennaPair],
) -> Option<AntennaPair> {
    let mut best: Option<(AntennaPair, f64)> = None;
    for &pair in candidates {
        let strength = harmonic_strength(channels, pair);
        if best.map_or(true, |(_, best_s)| strength > best_s) {
            best = Some((pair, strength));
        }
    }
    best.map(|(pair, _)| pair)
}

fn finish_fixed_size_selection(
    channels: &ChannelRealization,
    config: &NetworkConfig,
    chosen: Vec<AntennaPair>,
    scheme: Scheme,
) -> Result<SelectionResult, SelectionError> {
    let sigma_x2 = config.sigma_x2();
    let ploc = config.relay_local_power();
    let mut mse_trace = Vec::with_capacity(chosen.len());
    for prefix in 1..=chosen.len() {
        let link = build_link(channels, &chosen[..prefix], sigma_x2, ploc)?;
        mse_trace.push(mse_direct(
            &equivalent_link(&link),
            config.ns(),
            config.nd(),
            false,
        )?);
    }
    let mse = mse_trace
        .last()
        .copied()
        .unwrap_or(sigma_x2 * config.nd() as f64);
    Ok(SelectionResult {
        pairs: chosen,
        scheme,
        mse,
        mse_trace,
        per_relay_power_used: ploc,
    })
}

/// Reference scheme: repeatedly picks the remaining candidate with the
/// strongest harmonic-mean metric and retires its relay, until exactly
/// `multiplexing_gain` pairs are chosen.
pub fn dors_select(
    channels: &ChannelRealization,
    config: &NetworkConfig,
) -> Result<SelectionResult, SelectionError> {
    let m = config.multiplexing_gain();
    if config.relay_count() < m {
        return Err(SelectionError::InsufficientRelays {
            available: config.relay_count(),
            required: m,
        });
    }
    let mut remaining = candidate_pairs(config);
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let pick = argmax_by_strength(channels, &remaining)
            .expect("remaining candidates cover at least m relays");
        chosen.push(pick);
        remaining.retain(|p| p.relay != pick.relay);
    }
    finish_fixed_size_selection(channels, config, chosen, Scheme::Dors)
}

/// Principal angle between two complex vectors,
/// `acos(|<a, b>| / (|a| |b|))`, treating a zero vector as parallel.
fn principal_angle(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let na = a.norm_sq().sqrt();
    let nb = b.norm_sq().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let cosine = (a.conj_dot(b).norm() / (na * nb)).min(1.0);
    cosine.acos()
}

/// Reference scheme: the first pair is the harmonic-mean winner, and
/// each later pick maximizes the summed principal angles between its
/// two sub-channels and those of every already-selected pair. Exactly
/// `multiplexing_gain` pairs are chosen, one relay each.
pub fn so_select(
    channels: &ChannelRealization,
    config: &NetworkConfig,
) -> Result<SelectionResult, SelectionError> {
    let m = config.multiplexing_gain();
    if config.relay_count() < m {
        return Err(SelectionError::InsufficientRelays {
            available: config.relay_count(),
            required: m,
        });
    }
    let mut remaining = candidate_pairs(config);
    let mut chosen = Vec::with_capacity(m);
    let first = argmax_by_strength(channels, &remaining)
        .expect("remaining candidates cover at least m relays");
    chosen.push(first);
    remaining.retain(|p| p.relay != first.relay);

    while chosen.len() < m {
        let mut best: Option<(AntennaPair, f64)> = None;
        for &candidate in &remaining {
            let h = channels.backward_row(candidate);
            let g = channels.forward_col(candidate);
            let mut angle_sum = 0.0;
            for &taken in &chosen {
                angle_sum += principal_angle(&h, &channels.backward_row(taken));
                angle_sum += principal_angle(&g, &channels.forward_col(taken));
            }
            if best.map_or(true, |(_, best_a)| angle_sum > best_a) {
                best = Some((candidate, angle_sum));
            }
        }
        let (pick, _) = best.expect("remaining candidates cover at least m relays");
        chosen.push(pick);
        remaining.retain(|p| p.relay != pick.relay);
    }
    finish_fixed_size_selection(channels, config, chosen, Scheme::SemiOrthogonal)
}

fn binomial(n: usize, k: usize) -> Result<u128, SelectionError> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(SelectionError::CountOverflow)?
            / i as u128;
    }
    Ok(acc)
}

/// Number of candidate pair sets an exhaustive search visits: the sum
/// over set sizes `l` from `multiplexing_gain` to `l_max` of
/// `C(k, l) * (nr^2)^l`.
pub fn exhaustive_trial_count(config: &NetworkConfig, l_max: usize) -> Result<u64, SelectionError> {
    let k = config.relay_count();
    if l_max > k {
        return Err(SelectionError::InvalidLevelCap { l_max, relays: k });
    }
    let per_relay = (config.nr() as u128) * (config.nr() as u128);
    let mut total: u128 = 0;
    for l in config.multiplexing_gain()..=l_max {
        let subsets = binomial(k, l)?;
        let assignments = per_relay
            .checked_pow(l as u32)
            .ok_or(SelectionError::CountOverflow)?;
        total = total
            .checked_add(
                subsets
                    .checked_mul(assignments)
                    .ok_or(SelectionError::CountOverflow)?,
            )
            .ok_or(SelectionError::CountOverflow)?;
    }
    u64::try_from(total).map_err(|_| SelectionError::CountOverflow)
}

fn each_relay_subset(k: usize, l: usize, f: &mut impl FnMut(&[usize]) -> Result<(), SelectionError>) -> Result<(), SelectionError> {
    fn recurse(
        start: usize,
        k: usize,
        left: usize,
        current: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> Result<(), SelectionError>,
    ) -> Result<(), SelectionError> {
        if left == 0 {
            return f(current);
        }
        if k - start < left {
            return Ok(());
        }
        for relay in start..=(k - left) {
            current.push(relay);
            recurse(relay + 1, k, left - 1, current, f)?;
            current.pop();
        }
        Ok(())
    }
    let mut current = Vec::with_capacity(l);
    recurse(0, k, l, &mut current, f)
}

/// Brute-force minimum-MSE selection over every relay subset of size
/// `multiplexing_gain ..= l_max` and every antenna-pair assignment on
/// the subset, each evaluated with the direct closed-form MSE at full
/// per-relay power. Refuses to run when [`exhaustive_trial_count`]
/// exceeds `budget`.
pub fn exhaustive_select(
    channels: &ChannelRealization,
    config: &NetworkConfig,
    l_max: usize,
    budget: u64,
) -> Result<SelectionResult, SelectionError> {
    let required = exhaustive_trial_count(config, l_max)?;
    if required > budget {
        return Err(SelectionError::BudgetExceeded { required, budget });
    }
    let sigma_x2 = config.sigma_x2();
    let ploc = config.relay_local_power();
    let nr = config.nr();
    let per_relay = nr * nr;
    let mut best: Option<(Vec<AntennaPair>, f64)> = None;

    for l in config.multiplexing_gain()..=l_max {
        each_relay_subset(config.relay_count(), l, &mut |subset| {
            let mut assignment = vec![0usize; l];
            loop {
                let pairs: Vec<AntennaPair> = subset
                    .iter()
                    .zip(&assignment)
                    .map(|(&relay, &a)| AntennaPair {
                        relay,
                        backward_antenna: a / nr,
                        forward_antenna: a % nr,
                    })
                    .collect();
                let link = build_link(channels, &pairs, sigma_x2, ploc)?;
                let q = mse_direct(&equivalent_link(&link), config.ns(), config.nd(), false)?;
                if best.as_ref().map_or(true, |(_, best_q)| q < *best_q) {
                    best = Some((pairs, q));
                }

                // Odometer over assignments, last position fastest.
                let mut pos = l;
                loop {
                    if pos == 0 {
                        return Ok(());
                    }
                    pos -= 1;
                    assignment[pos] += 1;
                    if assignment[pos] < per_relay {
                        break;
                    }
                    assignment[pos] = 0;
                }
            }
        })?;
    }

    match best {
        Some((pairs, _)) => {
            let mut result = finish_fixed_size_selection(channels, config, pairs, Scheme::Exhaustive)?;
            result.scheme = Scheme::Exhaustive;
            Ok(result)
        }
        None => Ok(SelectionResult {
            pairs: Vec::new(),
            scheme: Scheme::Exhaustive,
            mse: sigma_x2 * config.nd() as f64,
            mse_trace: Vec::new(),
            per_relay_power_used: ploc,
        }),
    }
}

/// Rescales a selection to the total power budget of `multiplexing_gain`
/// relays: with `L` selected pairs each relay transmits with
/// `multiplexing_gain * ploc / L` instead of `ploc`, and the MSE trace is
/// recomputed at the diluted power. A greedy result is relabeled
/// [`Scheme::GmmGlobalPower`].
pub fn apply_global_power_constraint(
    result: &SelectionResult,
    channels: &ChannelRealization,
    config: &NetworkConfig,
) -> SelectionResult {
    let l = result.pairs.len();
    let scheme = if result.scheme == Scheme::Gmm {
        Scheme::GmmGlobalPower
    } else {
        result.scheme
    };
    if l == 0 {
        let mut out = result.clone();
        out.scheme = scheme;
        return out;
    }
    let diluted = config.multiplexing_gain() as f64 * config.relay_local_power() / l as f64;
    let sigma_x2 = config.sigma_x2();
    let mut mse_trace = Vec::with_capacity(l);
    for prefix in 1..=l {
        let link = build_link(channels, &result.pairs[..prefix], sigma_x2, diluted)
            .expect("pairs already validated by the original selection");
        let q = mse_direct(&equivalent_link(&link), config.ns(), config.nd(), false)
            .expect("noise covariance stays positive definite");
        mse_trace.push(q);
    }
    SelectionResult {
        pairs: result.pairs.clone(),
        scheme,
        mse: *mse_trace.last().expect("at least one pair"),
        mse_trace,
        per_relay_power_used: diluted,
    }
}
