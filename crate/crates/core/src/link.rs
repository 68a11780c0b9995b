//! Equivalent source-to-destination link induced by a set of selected
//! antenna pairs, and everything computed from it: amplification gains,
//! the equivalent channel and its noise covariance, the closed-form MMSE,
//! the Wiener receive filter, and QPSK transmission.

use crate::channel::{AntennaPair, ChannelRealization, TrialRng};
use crate::linalg::{
    hermitian_inverse, trace_of_product_real, ComplexMatrix, ComplexVector, LinalgError,
};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("antenna pairs must use distinct relays, relay {relay} appears twice")]
    DuplicateRelay { relay: usize },
    #[error("expected {expected} bits for one channel use, got {actual}")]
    BitLengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Numerical(#[from] LinalgError),
}

/// Amplification gain of one relay antenna pair.
///
/// The relay normalizes its expected receive power `sigma_x2 |h|^2 + 1`
/// (signal plus unit-variance noise) to the local budget `ploc`, so the
/// gain is `sqrt(ploc / (sigma_x2 |h|^2 + 1))`.
pub fn relay_gain(h_row: &ComplexVector, sigma_x2: f64, ploc: f64) -> f64 {
    (ploc / (sigma_x2 * h_row.norm_sq() + 1.0)).sqrt()
}

/// The channels and gains of `L` selected antenna pairs.
///
/// Rows of `h_sel` stack the backward rows of the pairs (shape `L x ns`),
/// columns of `g_sel` stack their forward columns (shape `nd x L`), and
/// `w_diag` holds the per-pair gains in the same order.
#[derive(Clone, Debug)]
pub struct SelectedLink {
    pairs: Vec<AntennaPair>,
    h_sel: ComplexMatrix,
    g_sel: ComplexMatrix,
    w_diag: Vec<f64>,
    sigma_x2: f64,
}

impl SelectedLink {
    /// Number of selected pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[AntennaPair] {
        &self.pairs
    }

    pub fn h_sel(&self) -> &ComplexMatrix {
        &self.h_sel
    }

    pub fn g_sel(&self) -> &ComplexMatrix {
        &self.g_sel
    }

    pub fn w_diag(&self) -> &[f64] {
        &self.w_diag
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    /// Assembles a link from explicit parts, for callers that need gains
    /// other than the ones [`build_link`] computes.
    pub fn from_parts(
        pairs: Vec<AntennaPair>,
        h_sel: ComplexMatrix,
        g_sel: ComplexMatrix,
        w_diag: Vec<f64>,
        sigma_x2: f64,
    ) -> Result<Self, LinkError> {
        let l = pairs.len();
        assert_eq!(h_sel.rows(), l, "h_sel must have one row per pair");
        assert_eq!(g_sel.cols(), l, "g_sel must have one column per pair");
        assert_eq!(w_diag.len(), l, "w_diag must have one gain per pair");
        for (i, pair) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|p| p.relay == pair.relay) {
                return Err(LinkError::DuplicateRelay { relay: pair.relay });
            }
        }
        Ok(Self { pairs, h_sel, g_sel, w_diag, sigma_x2 })
    }
}

/// Extracts the selected rows and columns from `channels` and computes
/// each pair's gain from `per_relay_power`. Every pair must sit on a
/// distinct relay, since a relay has a single power amplifier.
pub fn build_link(
    channels: &ChannelRealization,
    pairs: &[AntennaPair],
    sigma_x2: f64,
    per_relay_power: f64,
) -> Result<SelectedLink, LinkError> {
    let l = pairs.len();
    let ns = channels.backward(0).cols();
    let nd = channels.forward(0).rows();
    let mut h_sel = ComplexMatrix::zeros(l, ns);
    let mut g_sel = ComplexMatrix::zeros(nd, l);
    let mut w_diag = Vec::with_capacity(l);
    for (i, &pair) in pairs.iter().enumerate() {
        if pairs[..i].iter().any(|p| p.relay == pair.relay) {
            return Err(LinkError::DuplicateRelay { relay: pair.relay });
        }
        let h_row = channels.backward_row(pair);
        let g_col = channels.forward_col(pair);
        w_diag.push(relay_gain(&h_row, sigma_x2, per_relay_power));
        h_sel.set_row(i, &h_row);
        g_sel.set_col(i, &g_col);
    }
    Ok(SelectedLink {
        pairs: pairs.to_vec(),
        h_sel,
        g_sel,
        w_diag,
        sigma_x2,
    })
}

/// Equivalent one-hop description of a selected link.
///
/// `h_eq = G W H` is the `nd x ns` equivalent channel, `gw = G W` is the
/// path the relay noise takes to the destination, and
/// `phi = (G W)(G W)^H + I` is the covariance of the total effective
/// noise at the destination.
#[derive(Clone, Debug)]
pub struct EquivalentLink {
    h_eq: ComplexMatrix,
    gw: ComplexMatrix,
    phi: ComplexMatrix,
    sigma_x2: f64,
}

impl EquivalentLink {
    pub fn h_eq(&self) -> &ComplexMatrix {
        &self.h_eq
    }

    pub fn gw(&self) -> &ComplexMatrix {
        &self.gw
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    pub fn ns(&self) -> usize {
        self.h_eq.cols()
    }

    pub fn nd(&self) -> usize {
        self.h_eq.rows()
    }
}

pub fn equivalent_link(link: &SelectedLink) -> EquivalentLink {
    let gw = link.g_sel.scale_cols(&link.w_diag);
    let h_eq = gw.matmul(&link.h_sel);
    let nd = gw.rows();
    let phi = gw.matmul(&gw.hermitian()).add(&ComplexMatrix::identity(nd));
    EquivalentLink {
        h_eq,
        gw,
        phi,
        sigma_x2: link.sigma_x2,
    }
}

/// Closed-form MMSE of the equivalent link,
///
/// `Q = sigma_x2 * tr(phi (phi + sigma_x2 h_eq h_eq^H)^-1) + beta`
///
/// with `beta = sigma_x2 (ns - nd)`. The beta term completes the sum of
/// the per-stream error variances when `nd > ns`; with it the value
/// equals the expected squared error of the Wiener receiver. Rankings
/// between selections do not depend on it, so selection uses
/// `include_beta = false`.
pub fn mse_direct(
    eq: &EquivalentLink,
    ns: usize,
    nd: usize,
    include_beta: bool,
) -> Result<f64, LinalgError> {
    assert_eq!(eq.ns(), ns, "ns disagrees with the equivalent channel");
    assert_eq!(eq.nd(), nd, "nd disagrees with the equivalent channel");
    let a = eq
        .phi
        .add(&eq.h_eq.matmul(&eq.h_eq.hermitian()).scale(eq.sigma_x2));
    let a_inv = hermitian_inverse(&a)?;
    let mut q = eq.sigma_x2 * trace_of_product_real(&eq.phi, &a_inv);
    if include_beta {
        q += eq.sigma_x2 * (ns as f64 - nd as f64);
    }
    Ok(q)
}

/// Linear MMSE (Wiener) receive filter,
/// `F = sigma_x2 h_eq^H (sigma_x2 h_eq h_eq^H + phi)^-1`, shape `ns x nd`.
pub fn wiener_filter(eq: &EquivalentLink) -> Result<ComplexMatrix, LinalgError> {
    wiener_filter_at_noise(eq, 1.0)
}

/// Wiener filter for the same link with all noise standard deviations
/// multiplied by `noise_scale`: the noise covariance becomes
/// `noise_scale^2 phi`. At scale zero this is the zero-forcing limit,
/// which only exists for a full-rank square equivalent channel.
fn wiener_filter_at_noise(
    eq: &EquivalentLink,
    noise_scale: f64,
) -> Result<ComplexMatrix, LinalgError> {
    let a = eq
        .phi
        .scale(noise_scale * noise_scale)
        .add(&eq.h_eq.matmul(&eq.h_eq.hermitian()).scale(eq.sigma_x2));
    let a_inv = hermitian_inverse(&a)?;
    Ok(eq.h_eq.hermitian().scale(eq.sigma_x2).matmul(&a_inv))
}

/// Outcome of one QPSK channel use.
pub struct QpskTransmission {
    /// Signal observed at the destination antennas.
    pub received: ComplexVector,
    /// Hard decisions of the Wiener receiver, two bits per stream.
    pub detected_bits: Vec<u8>,
}

/// Sends one QPSK symbol vector across the link and detects it.
///
/// `bits` carries two bits per source antenna, Gray-mapped per stream as
/// `(b0, b1) -> ((1 - 2 b0) + i (1 - 2 b1)) / sqrt(2)` and scaled to
/// symbol variance `sigma_x2`. `noise_scale` overrides the noise
/// standard deviation of the whole model: relay noise and destination
/// noise are drawn independently from `rng` (relay noise first) and
/// scaled by it, and the detection filter assumes the same level. Pass
/// 1.0 for the modeled link; at 0.0 transmission is noiseless and the
/// filter degenerates to zero forcing, so detection is exact whenever
/// the zero-noise filter exists. Detection slices the filter output by
/// quadrant.
pub fn transmit_qpsk(
    eq: &EquivalentLink,
    bits: &[u8],
    rng: &mut TrialRng,
    noise_scale: f64,
) -> Result<QpskTransmission, LinkError> {
    let ns = eq.ns();
    let nd = eq.nd();
    if bits.len() != 2 * ns {
        return Err(LinkError::BitLengthMismatch {
            expected: 2 * ns,
            actual: bits.len(),
        });
    }
    debug_assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");

    let amplitude = eq.sigma_x2.sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let mut x = ComplexVector::zeros(ns);
    for i in 0..ns {
        let re = 1.0 - 2.0 * f64::from(bits[2 * i]);
        let im = 1.0 - 2.0 * f64::from(bits[2 * i + 1]);
        x.set(i, Complex64::new(amplitude * re, amplitude * im));
    }

    let relay_noise_len = eq.gw.cols();
    let mut relay_noise = ComplexVector::zeros(relay_noise_len);
    for i in 0..relay_noise_len {
        relay_noise.set(i, rng.standard_complex_gaussian() * noise_scale);
    }
    let mut received = eq.h_eq.matvec(&x);
    let relayed = eq.gw.matvec(&relay_noise);
    for i in 0..nd {
        let v = received.get(i) + relayed.get(i) + rng.standard_complex_gaussian() * noise_scale;
        received.set(i, v);
    }

    let filter = wiener_filter_at_noise(eq, noise_scale)?;
    let estimate = filter.matvec(&received);
    let mut detected_bits = Vec::with_capacity(2 * ns);
    for i in 0..ns {
        let z = estimate.get(i);
        detected_bits.push(u8::from(z.re <= 0.0));
        detected_bits.push(u8::from(z.im <= 0.0));
    }
    Ok(QpskTransmission {
        received,
        detected_bits,
    })
}
