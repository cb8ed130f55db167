//! Energy model: transceiver, transmit, linear-processing and backhaul
//! power components, and the energy-efficiency objective.

use serde::{Deserialize, Serialize};

use crate::quantizer::BitAllocation;
use crate::rates::{RateReport, Scheme};
use crate::scalar::Real;
use crate::scenario::SystemConfig;

/// Hardware power constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerParams {
    /// Per-antenna RAU circuit power (W).
    pub p_rau: f64,
    /// Per-user circuit power (W).
    pub p_ue: f64,
    /// Per-oscillator power (W).
    pub p_syn: f64,
    /// Complex operations per second per watt of processing power.
    pub l_rau: f64,
    /// Power-amplifier efficiency, in (0, 1].
    pub xi_amp: f64,
    /// Fixed power per backhaul link (W).
    pub p0: f64,
    /// Traffic-dependent backhaul power (W per bit/s).
    pub p_bt: f64,
    /// ADC power coefficients: `a0 * 2^bits + a1` per converter pair.
    pub a0: f64,
    pub a1: f64,
    /// Oscillator count; `None` means one per RAU (distributed deployment).
    pub rho_syn: Option<usize>,
    /// Apply the frame's data fraction to the EE rate sum as well.
    pub ee_prelog: bool,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            p_rau: 0.1,
            p_ue: 0.1,
            p_syn: 1.0,
            l_rau: 1.28e10,
            xi_amp: 0.4,
            p0: 0.825,
            p_bt: 0.25e-9,
            a0: 1.0e-4,
            a1: 0.02,
            rho_syn: None,
            ee_prelog: false,
        }
    }
}

impl PowerParams {
    fn oscillators(&self, cfg: &SystemConfig) -> usize {
        self.rho_syn.unwrap_or(cfg.n_total())
    }
}

fn pow2<F: Real>(bits: u8) -> F {
    F::of((1u64 << bits) as f64)
}

/// Total converter power: each RAU runs `m` converter pairs, each DL user
/// one.
pub fn p_adc_total<F: Real>(bits: &BitAllocation, cfg: &SystemConfig, params: &PowerParams) -> F {
    let a0 = F::of(params.a0);
    let a1 = F::of(params.a1);
    let m = F::of(cfg.m as f64);
    let raus: F = bits
        .ul_rau_bits
        .iter()
        .chain(&bits.dl_rau_bits)
        .map(|&b| a0 * m * pow2::<F>(b) + a1)
        .sum();
    let users: F = bits
        .dl_user_bits
        .iter()
        .map(|&b| a0 * pow2::<F>(b) + a1)
        .sum();
    raus + users
}

/// Transceiver-chain power: RAU circuits, oscillators, user circuits and
/// converters.
pub fn p_tc<F: Real>(bits: &BitAllocation, cfg: &SystemConfig, params: &PowerParams) -> F {
    F::of((cfg.n_total() * cfg.m) as f64) * F::of(params.p_rau)
        + F::of(params.oscillators(cfg) as f64) * F::of(params.p_syn)
        + F::of(cfg.k_total() as f64) * F::of(params.p_ue)
        + p_adc_total(bits, cfg, params)
}

/// Radiated power during the data phase, scaled by amplifier efficiency.
pub fn p_transmit<F: Real>(cfg: &SystemConfig, params: &PowerParams) -> F {
    let frac = F::of(cfg.t_data() as f64) / (F::of(cfg.t_frame as f64) * F::of(params.xi_amp));
    F::of(cfg.k_ul as f64) * frac * F::of(cfg.p_ul)
        + F::of(cfg.k_dl as f64) * frac * F::of(cfg.p_dl)
}

/// Combining/precoding compute power: a per-symbol filtering term over the
/// data phase plus a filter-computation term over the training phase.
pub fn p_linear_processing<F: Real>(
    cfg: &SystemConfig,
    params: &PowerParams,
    scheme: Scheme,
) -> F {
    let w = F::of(cfg.bandwidth_w);
    let mnk = F::of((cfg.m * cfg.n_total() * cfg.k_total()) as f64);
    let l = F::of(params.l_rau);
    let t = F::of(cfg.t_frame as f64);
    let tau = F::of((cfg.tau1 + cfg.tau2) as f64);
    let data = (t - tau) / t * F::of(2.0) * w * mnk / l;
    let training_flops = match scheme {
        Scheme::Mr => w * mnk * (F::of(3.0) * F::of(cfg.k_total() as f64) + F::one()) / l,
        Scheme::Zf => F::of(3.0) * w * mnk / l,
    };
    data + tau / t * training_flops
}

/// Backhaul power for a given sum rate in bits/s/Hz.
pub fn p_backhaul<F: Real>(sum_rate_hz: F, cfg: &SystemConfig, params: &PowerParams) -> F {
    F::of(cfg.n_total() as f64)
        * (F::of(params.p0) + F::of(cfg.bandwidth_w) * F::of(params.p_bt) * sum_rate_hz)
}

/// Sum of all four power components for a given rate sum (bits/s/Hz).
pub fn total_power<F: Real>(
    bits: &BitAllocation,
    sum_rate_hz: F,
    cfg: &SystemConfig,
    params: &PowerParams,
    scheme: Scheme,
) -> F {
    p_tc::<F>(bits, cfg, params)
        + p_transmit::<F>(cfg, params)
        + p_linear_processing::<F>(cfg, params, scheme)
        + p_backhaul::<F>(sum_rate_hz, cfg, params)
}

/// Energy efficiency in bits/Joule: delivered bit rate over total power.
pub fn energy_efficiency<F: Real>(
    rates: &RateReport<F>,
    bits: &BitAllocation,
    cfg: &SystemConfig,
    params: &PowerParams,
    scheme: Scheme,
) -> F {
    let mut sum_rate: F =
        rates.r_ul.iter().copied().sum::<F>() + rates.r_dl.iter().copied().sum::<F>();
    if params.ee_prelog {
        sum_rate = sum_rate * F::of(cfg.prelog());
    }
    F::of(cfg.bandwidth_w) * sum_rate / total_power(bits, sum_rate, cfg, params, scheme)
}
