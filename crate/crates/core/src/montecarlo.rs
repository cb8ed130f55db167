//! Full-chain instantaneous-rate oracle.
//!
//! Each trial draws every link, runs both estimation stages, builds the
//! precoders and combiners, and evaluates the instantaneous per-user SINRs.
//! Data symbols are never sampled: all interference and quantization powers
//! enter as conditional expectations given the channel realization, so the
//! only Monte-Carlo variance left is the channel (and pilot-noise) draw.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channels::{draw_channels, noise_rng};
use crate::error::{Error, Result};
use crate::estimation::interference::f_hat_realize;
use crate::estimation::pilot::{pilot_mmse_realize, pilot_mmse_stats, EtaFormula};
use crate::estimation::training::{bf_training_all, build_precoders, mu_hat_realize};
use crate::quantizer::{adc_gain_matrix, gain, BitAllocation};
use crate::rates::{CsiMode, IcMode, Scheme};
use crate::scenario::{ChannelStats, SystemConfig};

/// Simulation controls.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Two-sided confidence level of the reported interval, in (0, 1).
    pub ci_level: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 2000,
            seed: 0,
            ci_level: 0.95,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidArgument(
                "ci_level must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

/// Sample mean of a per-user rate with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub mean: f64,
    pub half_width: f64,
    pub trials_used: u64,
}

/// Per-user rate estimates of all four detection modes, produced from the
/// same channel realizations so cross-mode comparisons are paired.
#[derive(Debug, Clone, PartialEq)]
pub struct FullChainResult {
    pub dl_est: Vec<McResult>,
    pub dl_stat: Vec<McResult>,
    pub ul_ic: Vec<McResult>,
    pub ul_noic: Vec<McResult>,
}

struct TrialRates {
    dl_est: Vec<f64>,
    dl_stat: Vec<f64>,
    ul_ic: Vec<f64>,
    ul_noic: Vec<f64>,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

fn one_trial(
    cfg: &SystemConfig,
    stats: &ChannelStats<f64>,
    scheme: Scheme,
    theta_ul: &[f64],
    theta_dl: &[f64],
    xi: &[f64],
    bf: &[crate::estimation::BfTrainingStats<f64>],
    gains_ul: &[f64],
    seed: u64,
    trial: u64,
) -> Result<TrialRates> {
    let real = draw_channels(stats, cfg, seed, trial);
    let mut rng = noise_rng(seed, trial);

    let est = pilot_mmse_realize(&real, stats, cfg, theta_ul, theta_dl, &mut rng);
    let w = build_precoders(&est.g_hat_dl, scheme)?;
    let mu = mu_hat_realize(&real, &w, bf, cfg, xi, &mut rng);
    let (f_hat, f_err) = f_hat_realize(&real, &w, stats, cfg, gains_ul, &mut rng);
    let f_true = &f_hat + &f_err;

    // --- DL users -------------------------------------------------------
    let p_dl = cfg.p_dl;
    let p_ul = cfg.p_ul;
    let mut dl_est = Vec::with_capacity(cfg.k_dl);
    let mut dl_stat = Vec::with_capacity(cfg.k_dl);
    for k in 0..cfg.k_dl {
        let xi_k = xi[k];
        let cli: f64 = (0..cfg.k_ul)
            .map(|j| p_ul * real.u_i_user[(k, j)].norm_sqr())
            .sum();
        let rx_power: f64 = (0..cfg.k_dl)
            .map(|i| p_dl * mu.mu_true[(k, i)].norm_sqr())
            .sum::<f64>()
            + cli
            + cfg.sigma2_dl;
        // quantization noise referred back through the user's converter gain
        let c_eff = cfg.sigma2_dl + (1.0 - xi_k) * rx_power / xi_k;

        let err_sum: f64 = (0..cfg.k_dl)
            .map(|i| p_dl * (mu.mu_true[(k, i)] - mu.mu_hat[(k, i)]).norm_sqr())
            .sum();
        let est_cross: f64 = (0..cfg.k_dl)
            .filter(|&i| i != k)
            .map(|i| p_dl * mu.mu_hat[(k, i)].norm_sqr())
            .sum();
        let num = p_dl * mu.mu_hat[(k, k)].norm_sqr();
        dl_est.push(log2_1p(num / (est_cross + err_sum + cli + c_eff)));

        // statistical detection: the prior mean is the signal, everything
        // else (including the deviation of mu_kk from its mean) interferes
        let e_k = bf[k].e_k;
        let dev = p_dl * (mu.mu_true[(k, k)] - Complex64::new(e_k, 0.0)).norm_sqr();
        let true_cross: f64 = (0..cfg.k_dl)
            .filter(|&i| i != k)
            .map(|i| p_dl * mu.mu_true[(k, i)].norm_sqr())
            .sum();
        let num_s = p_dl * e_k * e_k;
        dl_stat.push(log2_1p(num_s / (dev + true_cross + cli + c_eff)));
    }

    // --- UL users -------------------------------------------------------
    let nm = cfg.n_ul * cfg.m;
    let combiners: DMatrix<Complex64> = match scheme {
        Scheme::Mr => est.g_hat_ul.clone(),
        Scheme::Zf => {
            let gram = est.g_hat_ul.adjoint() * &est.g_hat_ul;
            let inv = gram
                .try_inverse()
                .ok_or_else(|| Error::Scheme("receive Gram matrix is singular".into()))?;
            &est.g_hat_ul * inv
        }
    };
    // conditional per-antenna power of the unquantized UL receive signal
    let inst_power: Vec<f64> = (0..nm)
        .map(|row| {
            let users: f64 = (0..cfg.k_ul)
                .map(|i| p_ul * real.g_ul[(row, i)].norm_sqr())
                .sum();
            let cli: f64 = (0..cfg.k_dl)
                .map(|j| p_dl * f_true[(row, j)].norm_sqr())
                .sum();
            users + cli + cfg.sigma2_ul
        })
        .collect();
    let a_row = |row: usize| gains_ul[row / cfg.m];

    let mut ul_ic = Vec::with_capacity(cfg.k_ul);
    let mut ul_noic = Vec::with_capacity(cfg.k_ul);
    for k in 0..cfg.k_ul {
        let v = combiners.column(k);
        let va: Vec<Complex64> = (0..nm).map(|r| v[r].conj() * a_row(r)).collect();
        let dot = |mat: &DMatrix<Complex64>, c: usize| -> Complex64 {
            (0..nm).map(|r| va[r] * mat[(r, c)]).sum()
        };
        let sig = p_ul * dot(&est.g_hat_ul, k).norm_sqr();
        let cross: f64 = (0..cfg.k_ul)
            .filter(|&i| i != k)
            .map(|i| p_ul * dot(&est.g_hat_ul, i).norm_sqr())
            .sum();
        let err: f64 = (0..cfg.k_ul)
            .map(|i| p_ul * dot(&est.g_err_ul, i).norm_sqr())
            .sum();
        let noise: f64 = (0..nm)
            .map(|r| {
                let a = a_row(r);
                v[r].norm_sqr() * (a * a * cfg.sigma2_ul + a * (1.0 - a) * inst_power[r])
            })
            .sum();
        let cli_res: f64 = (0..cfg.k_dl)
            .map(|j| p_dl * dot(&f_err, j).norm_sqr())
            .sum();
        let cli_full: f64 = (0..cfg.k_dl)
            .map(|j| p_dl * dot(&f_true, j).norm_sqr())
            .sum();
        let den_common = cross + err + noise;
        ul_ic.push(log2_1p(sig / (den_common + cli_res)));
        ul_noic.push(log2_1p(sig / (den_common + cli_full)));
    }

    Ok(TrialRates {
        dl_est,
        dl_stat,
        ul_ic,
        ul_noic,
    })
}

fn summarize(samples: Vec<Vec<f64>>, users: usize, z: f64) -> Vec<McResult> {
    let n = samples.len() as f64;
    (0..users)
        .map(|u| {
            let mean = samples.iter().map(|t| t[u]).sum::<f64>() / n;
            let var = if samples.len() > 1 {
                samples.iter().map(|t| (t[u] - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            McResult {
                mean,
                half_width: z * (var / n).sqrt(),
                trials_used: samples.len() as u64,
            }
        })
        .collect()
}

/// Runs the full chain once per trial and reports all four detection modes
/// from the shared realizations.
pub fn simulate_all(
    cfg: &SystemConfig,
    stats: &ChannelStats<f64>,
    scheme: Scheme,
    bits: &BitAllocation,
    mc: &McConfig,
) -> Result<FullChainResult> {
    mc.validate()?;
    bits.validate(cfg.n_ul, cfg.n_dl, cfg.k_dl, crate::quantizer::B_MAX_DEFAULT)?;
    scheme.validate_dims(cfg)?;
    let theta_ul: Vec<f64> = bits
        .ul_rau_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let theta_dl: Vec<f64> = bits
        .dl_rau_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let xi: Vec<f64> = bits
        .dl_user_bits
        .iter()
        .map(|&b| gain(b))
        .collect::<Result<_>>()?;
    let pilot = pilot_mmse_stats(stats, cfg, &theta_ul, &theta_dl, EtaFormula::Orthogonal)?;
    let bf = bf_training_all(&pilot, cfg, scheme, &xi)?;
    let gains_ul = adc_gain_matrix::<f64>(&bits.ul_rau_bits, 1)?;

    let trials: Vec<TrialRates> = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            one_trial(
                cfg, stats, scheme, &theta_ul, &theta_dl, &xi, &bf, &gains_ul, mc.seed, t,
            )
        })
        .collect::<Result<_>>()?;

    let z = Normal::new(0.0, 1.0)
        .expect("unit normal")
        .inverse_cdf(0.5 + mc.ci_level / 2.0);
    let take = |f: fn(&TrialRates) -> &Vec<f64>, users: usize| {
        summarize(trials.iter().map(|t| f(t).clone()).collect(), users, z)
    };
    Ok(FullChainResult {
        dl_est: take(|t| &t.dl_est, cfg.k_dl),
        dl_stat: take(|t| &t.dl_stat, cfg.k_dl),
        ul_ic: take(|t| &t.ul_ic, cfg.k_ul),
        ul_noic: take(|t| &t.ul_noic, cfg.k_ul),
    })
}

/// Per-DL-user simulated rate under the chosen CSI mode.
pub fn simulate_dl_rate(
    cfg: &SystemConfig,
    stats: &ChannelStats<f64>,
    scheme: Scheme,
    bits: &BitAllocation,
    csi: CsiMode,
    mc: &McConfig,
) -> Result<Vec<McResult>> {
    let full = simulate_all(cfg, stats, scheme, bits, mc)?;
    Ok(match csi {
        CsiMode::Estimated => full.dl_est,
        CsiMode::Statistical => full.dl_stat,
    })
}

/// Per-UL-user simulated rate with or without interference cancellation.
pub fn simulate_ul_rate(
    cfg: &SystemConfig,
    stats: &ChannelStats<f64>,
    scheme: Scheme,
    bits: &BitAllocation,
    ic: IcMode,
    mc: &McConfig,
) -> Result<Vec<McResult>> {
    let full = simulate_all(cfg, stats, scheme, bits, mc)?;
    Ok(match ic {
        IcMode::On => full.ul_ic,
        IcMode::Off => full.ul_noic,
    })
}

/// Closed-form vs. simulation comparison record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub closed: f64,
    pub mc_mean: f64,
    pub rel_err: f64,
    pub pass: bool,
}

// pure division-by-zero guard: must sit far below any attainable rate so
// the comparison stays genuinely relative
const REL_ERR_FLOOR: f64 = 1e-300;

/// Relative error of a closed form against the simulated mean, judged at
/// `tolerance`.
pub fn compare_closed_form(closed: f64, mc: &McResult, tolerance: f64) -> Comparison {
    let rel_err = (closed - mc.mean).abs() / mc.mean.abs().max(REL_ERR_FLOOR);
    Comparison {
        closed,
        mc_mean: mc.mean,
        rel_err,
        pass: rel_err <= tolerance,
    }
}

/// One validation row per user/mode combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub scheme: Scheme,
    pub csi_mode: Option<CsiMode>,
    pub ic_mode: Option<IcMode>,
    pub bits: String,
    pub user: usize,
    pub closed_form: f64,
    pub mc: McResult,
    pub rel_err: f64,
}

/// Compact label for a bit allocation: the single value when uniform, the
/// dash-joined flat vector otherwise.
pub fn bits_label(bits: &BitAllocation) -> String {
    let flat = bits.flat();
    if flat.iter().all(|&b| b == flat[0]) {
        flat[0].to_string()
    } else {
        flat.iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// CSV export of validation rows.
pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let mut out =
        String::from("scheme,csi_mode,ic_mode,bits,user,closed_form,mc_mean,mc_halfwidth,rel_err\n");
    for r in rows {
        let csi = r.csi_mode.map(|c| c.to_string()).unwrap_or_default();
        let ic = r.ic_mode.map(|i| i.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            r.scheme, csi, ic, r.bits, r.user, r.closed_form, r.mc.mean, r.mc.half_width, r.rel_err
        ));
    }
    out
}
