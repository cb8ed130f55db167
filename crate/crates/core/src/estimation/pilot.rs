//! Stage one: UL pilot MMSE estimation at the RAUs.
//!
//! Every user sends an orthogonal pilot; each RAU quantizes the received
//! block and the CPU runs a per-link scalar MMSE. The closed-form estimate
//! and error variances feed the rate expressions; the per-realization path
//! feeds the simulation oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::ChannelRealization;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::{ChannelStats, SystemConfig};

/// How the error variance `eta` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaFormula {
    /// `eta = lambda - beta`: the MMSE orthogonality identity. Default.
    #[default]
    Orthogonal,
    /// `eta = ((1-theta)*p*lambda + lambda*sigma2) / (p*lambda + sigma2)`:
    /// an alternative reading that agrees with `Orthogonal` only at
    /// `lambda = 1`; kept for reproducing results computed with it.
    Direct,
}

/// Estimate (`beta`) and error (`eta`) variances per (RAU, user) link for
/// both operating modes. Indexing is `[rau][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstStats<F: Real> {
    pub beta_ul: Vec<Vec<F>>,
    pub eta_ul: Vec<Vec<F>>,
    pub beta_dl: Vec<Vec<F>>,
    pub eta_dl: Vec<Vec<F>>,
}

fn mode_stats<F: Real>(
    lambda: &[Vec<F>],
    theta: &[F],
    p_up: F,
    sigma2_up: F,
    formula: EtaFormula,
) -> Result<(Vec<Vec<F>>, Vec<Vec<F>>)> {
    if theta.len() != lambda.len() {
        return Err(Error::InvalidArgument(
            "one converter gain per RAU required".into(),
        ));
    }
    let mut beta = Vec::with_capacity(lambda.len());
    let mut eta = Vec::with_capacity(lambda.len());
    for (row, &th) in lambda.iter().zip(theta) {
        if !(th > F::zero() && th <= F::one()) {
            return Err(Error::InvalidArgument(
                "converter gains must lie in (0, 1]".into(),
            ));
        }
        let mut b_row = Vec::with_capacity(row.len());
        let mut e_row = Vec::with_capacity(row.len());
        for &l in row {
            let denom = p_up * l + sigma2_up;
            let b = p_up * th * l * l / denom;
            let e = match formula {
                EtaFormula::Orthogonal => l - b,
                EtaFormula::Direct => ((F::one() - th) * p_up * l + l * sigma2_up) / denom,
            };
            b_row.push(b);
            e_row.push(e);
        }
        beta.push(b_row);
        eta.push(e_row);
    }
    Ok((beta, eta))
}

/// Closed-form stage-one statistics for every access link. `theta_ul` and
/// `theta_dl` are the converter gains of the UL and DL RAUs.
pub fn pilot_mmse_stats<F: Real>(
    stats: &ChannelStats<F>,
    cfg: &SystemConfig,
    theta_ul: &[F],
    theta_dl: &[F],
    formula: EtaFormula,
) -> Result<PilotEstStats<F>> {
    let p = F::of(cfg.p_up);
    let s2 = F::of(cfg.sigma2_up);
    let (beta_ul, eta_ul) = mode_stats(&stats.lambda_ul, theta_ul, p, s2, formula)?;
    let (beta_dl, eta_dl) = mode_stats(&stats.lambda_dl, theta_dl, p, s2, formula)?;
    Ok(PilotEstStats {
        beta_ul,
        eta_ul,
        beta_dl,
        eta_dl,
    })
}

/// One realization of the stage-one estimates: `g_hat + g_err` recovers the
/// true channel exactly. Matrices are stacked like [`ChannelRealization`].
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimate {
    pub g_hat_ul: DMatrix<Complex64>,
    pub g_err_ul: DMatrix<Complex64>,
    pub g_hat_dl: DMatrix<Complex64>,
    pub g_err_dl: DMatrix<Complex64>,
}

fn realize_mode(
    g: &DMatrix<Complex64>,
    lambda: &[Vec<f64>],
    theta: &[f64],
    m: usize,
    p_up: f64,
    sigma2_up: f64,
    rng: &mut impl Rng,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let g_hat = DMatrix::from_fn(g.nrows(), g.ncols(), |row, k| {
        let n = row / m;
        let th = theta[n];
        let lam = lambda[n][k];
        // despread pilot observation for this link, then its quantized form
        let noise_std = (sigma2_up / 2.0).sqrt();
        let w = Complex64::new(
            noise_std * rng.sample::<f64, _>(StandardNormal),
            noise_std * rng.sample::<f64, _>(StandardNormal),
        );
        let y = p_up.sqrt() * g[(row, k)] + w;
        let qvar = th * (1.0 - th) * y.norm_sqr();
        let qn = if qvar > 0.0 {
            let std = (qvar / 2.0).sqrt();
            Complex64::new(
                std * rng.sample::<f64, _>(StandardNormal),
                std * rng.sample::<f64, _>(StandardNormal),
            )
        } else {
            Complex64::new(0.0, 0.0)
        };
        let y_q = th * y + qn;
        // scalar MMSE gain: sqrt(p)*lambda / (p*lambda + sigma2); together
        // with the quantizer gain inside y_q the estimate variance is beta
        let c = p_up.sqrt() * lam / (p_up * lam + sigma2_up);
        c * y_q
    });
    let g_err = g - &g_hat;
    (g_hat, g_err)
}

/// Simulates the stage-one pipeline (pilot reception, quantization,
/// despreading, scalar MMSE) for one channel realization.
pub fn pilot_mmse_realize(
    real: &ChannelRealization,
    stats: &ChannelStats<f64>,
    cfg: &SystemConfig,
    theta_ul: &[f64],
    theta_dl: &[f64],
    rng: &mut impl Rng,
) -> PilotEstimate {
    let (g_hat_ul, g_err_ul) = realize_mode(
        &real.g_ul,
        &stats.lambda_ul,
        theta_ul,
        cfg.m,
        cfg.p_up,
        cfg.sigma2_up,
        rng,
    );
    let (g_hat_dl, g_err_dl) = realize_mode(
        &real.g_dl,
        &stats.lambda_dl,
        theta_dl,
        cfg.m,
        cfg.p_up,
        cfg.sigma2_up,
        rng,
    );
    PilotEstimate {
        g_hat_ul,
        g_err_ul,
        g_hat_dl,
        g_err_dl,
    }
}
