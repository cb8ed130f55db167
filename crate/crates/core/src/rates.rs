//! Closed-form spectral efficiency: per-user DL rates under estimated and
//! statistical CSI, per-user UL rates with and without cross-link
//! interference cancellation, and the sum-SE objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::interference::{interference_mmse, interference_off, InterferenceEstStats};
use crate::estimation::pilot::{pilot_mmse_stats, EtaFormula, PilotEstStats};
use crate::estimation::training::{bf_training_all, dim_loss, BfTrainingStats};
use crate::quantizer::{gain, BitAllocation};
use crate::scalar::Real;
use crate::scenario::{ChannelStats, SystemConfig};

/// Precoder/receiver pairing: matched filtering (MRT with MRC) or
/// zero-forcing (ZFT with ZFR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mr,
    Zf,
}

impl Scheme {
    pub fn validate_dims(self, cfg: &SystemConfig) -> Result<()> {
        if self == Scheme::Zf && (cfg.n_dl * cfg.m < cfg.k_dl || cfg.n_ul * cfg.m < cfg.k_ul) {
            return Err(Error::Scheme(
                "zero-forcing needs at least as many antennas as users on each side".into(),
            ));
        }
        Ok(())
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Mr => "mr",
            Scheme::Zf => "zf",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mr" => Ok(Scheme::Mr),
            "zf" => Ok(Scheme::Zf),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Which CSI the DL users detect with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Estimated,
    Statistical,
}

impl std::fmt::Display for CsiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CsiMode::Estimated => "estimated",
            CsiMode::Statistical => "statistical",
        })
    }
}

impl std::str::FromStr for CsiMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimated" => Ok(CsiMode::Estimated),
            "statistical" => Ok(CsiMode::Statistical),
            other => Err(Error::Parse(format!("unknown csi mode '{other}'"))),
        }
    }
}

/// Whether the UL RAUs subtract the reconstructed cross-link interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcMode {
    On,
    Off,
}

impl std::fmt::Display for IcMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IcMode::On => "on",
            IcMode::Off => "off",
        })
    }
}

impl std::str::FromStr for IcMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(IcMode::On),
            "off" => Ok(IcMode::Off),
            other => Err(Error::Parse(format!("unknown ic mode '{other}'"))),
        }
    }
}

/// Per-user closed-form rates plus the pre-log-weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport<F: Real> {
    pub r_dl: Vec<F>,
    pub r_ul: Vec<F>,
    pub sum_se: F,
    pub csi_mode: CsiMode,
    pub ic_mode: IcMode,
}

fn log2_1p<F: Real>(sinr: F) -> F {
    // ln_1p keeps tiny SINRs (below f64 epsilon) from rounding to zero rate
    sinr.ln_1p() / F::of(std::f64::consts::LN_2)
}

/// DL rate per user with beamforming-training (estimated) CSI.
pub fn dl_rate_estimated<F: Real>(
    bf: &[BfTrainingStats<F>],
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    bits_user: &[u8],
) -> Result<Vec<F>> {
    scheme.validate_dims(cfg)?;
    let p_dl = F::of(cfg.p_dl);
    let p_ul = F::of(cfg.p_ul);
    let p_dp = F::of(cfg.p_dp);
    let s2_dl = F::of(cfg.sigma2_dl);
    let s2_dp = F::of(cfg.sigma2_dp);
    (0..cfg.k_dl)
        .map(|k| {
            let st = &bf[k];
            let xi: F = gain(bits_user[k])?;
            let e2 = st.e_k * st.e_k;
            let f = p_dp * st.chi_bar * st.chi_bar / (p_dp * st.chi_tilde + s2_dp);
            let cli: F = (0..cfg.k_ul)
                .map(|j| p_ul * stats.lambda_i_user[k][j])
                .sum();
            let a = F::of((cfg.k_dl - 1) as f64) * xi * p_dl * st.chi + cli;
            let b = (xi * (F::one() - xi) * p_dp * st.chi_bar * e2 + xi * st.chi_bar * s2_dp)
                / (st.chi_bar + (F::one() - xi) * e2 + s2_dp / p_dl);
            let c = (F::one() - xi) * p_dl * (st.chi_bar + e2);
            Ok(log2_1p(xi * p_dl * (e2 + f) / (a + b + c + s2_dl)))
        })
        .collect()
}

/// DL rate per user when detection relies on the prior mean only.
pub fn dl_rate_statistical<F: Real>(
    bf: &[BfTrainingStats<F>],
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    bits_user: &[u8],
) -> Result<Vec<F>> {
    scheme.validate_dims(cfg)?;
    let p_dl = F::of(cfg.p_dl);
    let p_ul = F::of(cfg.p_ul);
    let s2_dl = F::of(cfg.sigma2_dl);
    (0..cfg.k_dl)
        .map(|k| {
            let st = &bf[k];
            let xi: F = gain(bits_user[k])?;
            let e2 = st.e_k * st.e_k;
            let a = F::of((cfg.k_dl - 1) as f64) * xi * p_dl * st.chi + p_dl * st.chi_bar;
            let cli: F = (0..cfg.k_ul)
                .map(|j| p_ul * stats.lambda_i_user[k][j])
                .sum();
            let b = cli + (F::one() - xi) * p_dl * e2;
            Ok(log2_1p(xi * p_dl * e2 / (a + b + s2_dl)))
        })
        .collect()
}

/// UL rate per user. `intf` carries the post-cancellation residual powers
/// (use [`interference_off`] statistics to disable cancellation).
pub fn ul_rate<F: Real>(
    pilot: &PilotEstStats<F>,
    intf: &InterferenceEstStats<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    bits_rau: &[u8],
) -> Result<Vec<F>> {
    scheme.validate_dims(cfg)?;
    let p_ul = F::of(cfg.p_ul);
    let p_dl = F::of(cfg.p_dl);
    let s2_ul = F::of(cfg.sigma2_ul);
    let m = F::of(cfg.m as f64);
    let n_ul = F::of(cfg.n_ul as f64);
    let alpha: Vec<F> = bits_rau.iter().map(|&b| gain(b)).collect::<Result<_>>()?;
    let t_ul: F = match scheme {
        Scheme::Mr => F::one(),
        Scheme::Zf => dim_loss(cfg.n_ul, cfg.m, cfg.k_ul),
    };
    (0..cfg.k_ul)
        .map(|k| {
            let mut sig = F::zero();
            let mut b_term = F::zero();
            let mut c_term = F::zero();
            let mut noise = F::zero();
            for n in 0..cfg.n_ul {
                let a = alpha[n];
                let beta_nk = pilot.beta_ul[n][k];
                sig = sig + t_ul * p_ul * m * a * a * beta_nk;
                b_term = b_term + t_ul * p_ul * m * a * (F::one() - a) * beta_nk;
                let err_sum: F = (0..cfg.k_ul).map(|i| p_ul * pilot.eta_ul[n][i]).sum();
                let c_n = match scheme {
                    Scheme::Mr => {
                        let other: F = (0..cfg.k_ul)
                            .filter(|&i| i != k)
                            .map(|i| p_ul * pilot.beta_ul[n][i])
                            .sum();
                        p_dl * intf.rho_res[n] + other + err_sum
                    }
                    Scheme::Zf => {
                        F::of(cfg.k_dl as f64) * p_dl * intf.rho_res[n] + err_sum + s2_ul
                    }
                };
                c_term = c_term + a * c_n / n_ul;
                if scheme == Scheme::Mr {
                    noise = noise + s2_ul * a / n_ul;
                }
            }
            Ok(log2_1p(sig / (b_term + c_term + noise)))
        })
        .collect()
}

/// Sum spectral efficiency including the data fraction of the frame.
pub fn sum_se<F: Real>(r_ul: &[F], r_dl: &[F], cfg: &SystemConfig) -> F {
    let total = r_ul.iter().copied().sum::<F>() + r_dl.iter().copied().sum::<F>();
    F::of(cfg.prelog()) * total
}

/// Runs the whole closed-form chain for one bit allocation.
pub fn closed_form_report<F: Real>(
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    csi: CsiMode,
    ic: IcMode,
    bits: &BitAllocation,
) -> Result<RateReport<F>> {
    bits.validate(cfg.n_ul, cfg.n_dl, cfg.k_dl, crate::quantizer::B_MAX_DEFAULT)?;
    scheme.validate_dims(cfg)?;
    let theta_ul: Vec<F> = bits
        .ul_rau_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let theta_dl: Vec<F> = bits
        .dl_rau_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let xi: Vec<F> = bits
        .dl_user_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let pilot = pilot_mmse_stats(stats, cfg, &theta_ul, &theta_dl, EtaFormula::Orthogonal)?;
    let bf = bf_training_all(&pilot, cfg, scheme, &xi)?;
    let r_dl = match csi {
        CsiMode::Estimated => dl_rate_estimated(&bf, stats, cfg, scheme, &bits.dl_user_bits)?,
        CsiMode::Statistical => dl_rate_statistical(&bf, stats, cfg, scheme, &bits.dl_user_bits)?,
    };
    let intf = match ic {
        IcMode::On => interference_mmse(stats, cfg, &theta_ul)?,
        IcMode::Off => interference_off(stats, cfg),
    };
    let r_ul = ul_rate(&pilot, &intf, cfg, scheme, &bits.ul_rau_bits)?;
    let sum = sum_se(&r_ul, &r_dl, cfg);
    Ok(RateReport {
        r_dl,
        r_ul,
        sum_se: sum,
        csi_mode: csi,
        ic_mode: ic,
    })
}
