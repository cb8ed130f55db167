//! Stage two, RAU side: estimation of the effective RAU-to-RAU
//! interference channels used for cancellation, and the residual power left
//! after subtracting the reconstructed interference.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::ChannelRealization;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::{ChannelStats, SystemConfig};

/// Closed-form cancellation statistics per UL RAU. The equivalent
/// large-scale gain `delta` of the estimated effective interference channel
/// is the same for every DL beam, so both fields are indexed by UL RAU only.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceEstStats<F: Real> {
    pub delta: Vec<F>,
    /// Interference power (per beam, per antenna) remaining after
    /// cancellation.
    pub rho_res: Vec<F>,
}

/// Mean effective interference power per antenna at UL RAU `j`:
/// `sum_n lambda_I[j][n] / n_dl`.
fn lambda_bar<F: Real>(stats: &ChannelStats<F>, cfg: &SystemConfig, j: usize) -> F {
    stats.lambda_i_rau[j].iter().copied().sum::<F>() / F::of(cfg.n_dl as f64)
}

/// Closed-form MMSE statistics of the effective interference channel.
/// `adc_gains` holds one converter gain per UL RAU.
pub fn interference_mmse<F: Real>(
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
    adc_gains: &[F],
) -> Result<InterferenceEstStats<F>> {
    if adc_gains.len() != cfg.n_ul {
        return Err(Error::InvalidArgument(
            "one converter gain per UL RAU required".into(),
        ));
    }
    let p = F::of(cfg.p_dp);
    let s2 = F::of(cfg.sigma2_up);
    let n_dl = F::of(cfg.n_dl as f64);
    let mut delta = Vec::with_capacity(cfg.n_ul);
    let mut rho_res = Vec::with_capacity(cfg.n_ul);
    for (j, &alpha) in adc_gains.iter().enumerate() {
        if !(alpha >= F::zero() && alpha <= F::one()) {
            return Err(Error::InvalidArgument(
                "converter gains must lie in [0, 1]".into(),
            ));
        }
        let s: F = stats.lambda_i_rau[j].iter().copied().sum();
        let d = (p * alpha).sqrt() * s / (n_dl * p * s + n_dl * n_dl * s2).sqrt();
        delta.push(d);
        rho_res.push((s / n_dl - d * d).max(F::zero()));
    }
    Ok(InterferenceEstStats { delta, rho_res })
}

/// Statistics when cancellation is disabled: nothing is subtracted, so the
/// full mean interference power remains.
pub fn interference_off<F: Real>(
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
) -> InterferenceEstStats<F> {
    let delta = vec![F::zero(); cfg.n_ul];
    let rho_res = (0..cfg.n_ul).map(|j| lambda_bar(stats, cfg, j)).collect();
    InterferenceEstStats { delta, rho_res }
}

/// Estimated effective interference vectors and their errors for one
/// realization, both `(n_ul*m) x k_dl`; `f_hat + f_err` is the true
/// effective channel `G_I * w_i` per column.
pub fn f_hat_realize(
    real: &ChannelRealization,
    w: &DMatrix<Complex64>,
    stats: &ChannelStats<f64>,
    cfg: &SystemConfig,
    adc_gains: &[f64],
    rng: &mut impl Rng,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let f = &real.g_i_rau * w;
    let p = cfg.p_dp;
    let s2 = cfg.sigma2_up;
    let f_hat = DMatrix::from_fn(f.nrows(), f.ncols(), |row, i| {
        let j = row / cfg.m;
        let alpha = adc_gains[j];
        let lb = lambda_bar(stats, cfg, j);
        let noise_std = (s2 / 2.0).sqrt();
        let n = Complex64::new(
            noise_std * rng.sample::<f64, _>(StandardNormal),
            noise_std * rng.sample::<f64, _>(StandardNormal),
        );
        let y = p.sqrt() * f[(row, i)] + n;
        let qvar = alpha * (1.0 - alpha) * y.norm_sqr();
        let qn = if qvar > 0.0 {
            let std = (qvar / 2.0).sqrt();
            Complex64::new(
                std * rng.sample::<f64, _>(StandardNormal),
                std * rng.sample::<f64, _>(StandardNormal),
            )
        } else {
            Complex64::new(0.0, 0.0)
        };
        let y_q = alpha * y + qn;
        // per-entry MMSE: the covariance bracket is diagonal, so the filter
        // is a scalar division
        p.sqrt() * lb / (p * lb + s2) * y_q
    });
    let f_err = f - &f_hat;
    (f_hat, f_err)
}
