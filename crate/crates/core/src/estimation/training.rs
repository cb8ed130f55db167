//! Stage two, user side: beamforming training.
//!
//! The DL RAUs transmit precoded pilots so each user can estimate its
//! effective scalar channel `mu_{k,i} = g_k^H w_i`. The closed-form moments
//! come from Gamma moment matching of the stage-one estimate and error
//! powers; the per-realization path simulates the training exchange and the
//! scalar MMSE filter built from those moments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::ChannelRealization;
use crate::error::{Error, Result};
use crate::estimation::gamma::{gamma_sum, nakagami_mean, GammaPair};
use crate::rates::Scheme;
use crate::scalar::Real;
use crate::scenario::SystemConfig;

use super::pilot::PilotEstStats;

/// Closed-form moments of the effective own-channel gain of one DL user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfTrainingStats<F: Real> {
    /// Mean of the own-channel gain `mu_kk`.
    pub e_k: F,
    /// Variance of `mu_kk` around `e_k`.
    pub chi_bar: F,
    /// `chi_bar + (1 - xi_k) * e_k^2`: the variance seen through the user's
    /// quantizer.
    pub chi_tilde: F,
    /// Second moment of a cross gain `mu_ki`, `i != k`.
    pub chi: F,
    /// Dimension-loss factors of zero-forcing precoding / receiving.
    pub t_dl: F,
    pub t_ul: F,
}

/// Dimension-loss factor `(n*m - k + 1) / (n*m)` of a zero-forcing stage.
pub fn dim_loss<F: Real>(n: usize, m: usize, k: usize) -> F {
    F::of((n * m + 1 - k) as f64) / F::of((n * m) as f64)
}

/// Moments of `mu_{k,i}` for one user from the Gamma parameters of its
/// stage-one estimate power (`gamma_hat`) and error power (`gamma_err`).
pub fn bf_training_stats<F: Real>(
    gamma_hat: GammaPair<F>,
    gamma_err: GammaPair<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    xi_k: F,
) -> Result<BfTrainingStats<F>> {
    if !(xi_k > F::zero() && xi_k <= F::one()) {
        return Err(Error::InvalidArgument(
            "user quantizer gain must lie in (0, 1]".into(),
        ));
    }
    if scheme == Scheme::Zf && cfg.n_dl * cfg.m < cfg.k_dl {
        return Err(Error::Scheme(format!(
            "zero-forcing needs n_dl*m >= k_dl ({} < {})",
            cfg.n_dl * cfg.m,
            cfg.k_dl
        )));
    }
    let t_dl = dim_loss::<F>(cfg.n_dl, cfg.m, cfg.k_dl);
    let t_ul = dim_loss::<F>(cfg.n_ul, cfg.m, cfg.k_ul);
    let nm = F::of((cfg.n_dl * cfg.m) as f64);
    let hat_mean = gamma_hat.mean();
    let err_mean = gamma_err.mean();

    // Under zero-forcing the own beam lives in an (n*m - k + 1)-dimensional
    // subspace, shrinking the shape of the own-gain power by t_dl.
    let (e_k, own_power) = match scheme {
        Scheme::Mr => (nakagami_mean(gamma_hat)?, hat_mean),
        Scheme::Zf => {
            let projected = GammaPair::new(t_dl * gamma_hat.shape, gamma_hat.scale);
            (nakagami_mean(projected)?, projected.mean())
        }
    };
    let chi_bar = own_power - e_k * e_k + err_mean / nm;
    let chi_tilde = chi_bar + (F::one() - xi_k) * e_k * e_k;
    let chi = (hat_mean + err_mean) / nm;
    Ok(BfTrainingStats {
        e_k,
        chi_bar,
        chi_tilde,
        chi,
        t_dl,
        t_ul,
    })
}

/// Per-user training moments for every DL user, with the Gamma pairs built
/// from the stage-one variances (sum over DL RAUs, `m` antennas each).
pub fn bf_training_all<F: Real>(
    pilot: &PilotEstStats<F>,
    cfg: &SystemConfig,
    scheme: Scheme,
    xi: &[F],
) -> Result<Vec<BfTrainingStats<F>>> {
    if xi.len() != cfg.k_dl {
        return Err(Error::InvalidArgument(
            "one quantizer gain per DL user required".into(),
        ));
    }
    (0..cfg.k_dl)
        .map(|k| {
            let hat: Vec<(usize, F)> = (0..cfg.n_dl)
                .map(|n| (cfg.m, pilot.beta_dl[n][k]))
                .collect();
            let err: Vec<(usize, F)> = (0..cfg.n_dl)
                .map(|n| (cfg.m, pilot.eta_dl[n][k]))
                .collect();
            bf_training_stats(gamma_sum(&hat)?, gamma_sum(&err)?, cfg, scheme, xi[k])
        })
        .collect()
}

/// Builds the unit-norm precoding matrix from the stage-one DL estimates:
/// matched columns for MR, pseudo-inverse columns for ZF.
pub fn build_precoders(
    g_hat_dl: &DMatrix<Complex64>,
    scheme: Scheme,
) -> Result<DMatrix<Complex64>> {
    let raw = match scheme {
        Scheme::Mr => g_hat_dl.clone(),
        Scheme::Zf => {
            let gram = g_hat_dl.adjoint() * g_hat_dl;
            let inv = gram.try_inverse().ok_or_else(|| {
                Error::Scheme("zero-forcing Gram matrix is singular".into())
            })?;
            g_hat_dl * inv
        }
    };
    let mut w = raw;
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::Scheme("precoder column has zero norm".into()));
        }
        col /= Complex64::new(norm, 0.0);
    }
    Ok(w)
}

/// True and estimated effective DL gains for one realization, both
/// `k_dl x k_dl` with `[k][i] =` gain from beam `i` at user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuRealization {
    pub mu_true: DMatrix<Complex64>,
    pub mu_hat: DMatrix<Complex64>,
}

/// Simulates the training exchange (beamformed pilot, user-side
/// quantization, despreading) and applies the scalar MMSE filter with the
/// closed-form moments. `xi` holds the per-user quantizer gains.
pub fn mu_hat_realize(
    real: &ChannelRealization,
    w: &DMatrix<Complex64>,
    bf: &[BfTrainingStats<f64>],
    cfg: &SystemConfig,
    xi: &[f64],
    rng: &mut impl Rng,
) -> MuRealization {
    let mu_true = real.g_dl.adjoint() * w;
    let p = cfg.p_dp;
    let s2 = cfg.sigma2_dp;
    let mu_hat = DMatrix::from_fn(cfg.k_dl, cfg.k_dl, |k, i| {
        let st = &bf[k];
        let xi_k = xi[k];
        let noise_std = (s2 / 2.0).sqrt();
        let n = Complex64::new(
            noise_std * rng.sample::<f64, _>(StandardNormal),
            noise_std * rng.sample::<f64, _>(StandardNormal),
        );
        let y = p.sqrt() * mu_true[(k, i)] + n;
        let qvar = xi_k * (1.0 - xi_k) * y.norm_sqr();
        let qn = if qvar > 0.0 {
            let std = (qvar / 2.0).sqrt();
            Complex64::new(
                std * rng.sample::<f64, _>(StandardNormal),
                std * rng.sample::<f64, _>(StandardNormal),
            )
        } else {
            Complex64::new(0.0, 0.0)
        };
        let y_q = xi_k * y + qn;
        if i == k {
            // observation-dependent MMSE around the prior mean e_k
            let gain = p.sqrt() * st.chi_bar / (p * st.chi_tilde + s2);
            Complex64::new(st.e_k, 0.0) + gain * (y_q - xi_k * p.sqrt() * st.e_k)
        } else {
            // zero prior mean; second moment chi
            let gain = p.sqrt() * st.chi / (p * st.chi + s2);
            gain * y_q
        }
    });
    MuRealization { mu_true, mu_hat }
}
