//! Small-scale fading draws for the Monte-Carlo oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scenario::{ChannelStats, SystemConfig};

/// One sampled realization of all four link classes. Access channels are
/// stacked over RAUs: `g_ul` is `(n_ul*m) x k_ul`, `g_dl` is `(n_dl*m) x
/// k_dl`, `g_i_rau` is `(n_ul*m) x (n_dl*m)` and `u_i_user` is
/// `k_dl x k_ul`. Every entry is `sqrt(lambda)` times a unit-variance
/// circularly-symmetric complex Gaussian draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g_ul: DMatrix<Complex64>,
    pub g_dl: DMatrix<Complex64>,
    pub g_i_rau: DMatrix<Complex64>,
    pub u_i_user: DMatrix<Complex64>,
}

fn cn_unit(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// RNG for one link class of one trial; draws stay reproducible however
/// trials are scheduled across workers.
fn stream_rng(seed: u64, trial: u64, link_class: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(8) + link_class);
    rng
}

/// Samples every link of one Monte-Carlo trial. `trial` selects an
/// independent substream of the master `seed`.
pub fn draw_channels(
    stats: &ChannelStats<f64>,
    cfg: &SystemConfig,
    seed: u64,
    trial: u64,
) -> ChannelRealization {
    let m = cfg.m;

    let mut rng = stream_rng(seed, trial, 0);
    let g_ul = DMatrix::from_fn(cfg.n_ul * m, cfg.k_ul, |row, k| {
        let scale = stats.lambda_ul[row / m][k].sqrt();
        scale * cn_unit(&mut rng)
    });

    let mut rng = stream_rng(seed, trial, 1);
    let g_dl = DMatrix::from_fn(cfg.n_dl * m, cfg.k_dl, |row, k| {
        let scale = stats.lambda_dl[row / m][k].sqrt();
        scale * cn_unit(&mut rng)
    });

    let mut rng = stream_rng(seed, trial, 2);
    let g_i_rau = DMatrix::from_fn(cfg.n_ul * m, cfg.n_dl * m, |row, col| {
        let scale = stats.lambda_i_rau[row / m][col / m].sqrt();
        scale * cn_unit(&mut rng)
    });

    let mut rng = stream_rng(seed, trial, 3);
    let u_i_user = DMatrix::from_fn(cfg.k_dl, cfg.k_ul, |k, j| {
        let scale = stats.lambda_i_user[k][j].sqrt();
        scale * cn_unit(&mut rng)
    });

    ChannelRealization {
        g_ul,
        g_dl,
        g_i_rau,
        u_i_user,
    }
}

/// RNG substream reserved for in-trial noise (pilot noise, quantization
/// noise) so channel draws stay untouched by estimation-path sampling.
pub fn noise_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    stream_rng(seed, trial, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{self, large_scale_fading, sample_geometry};
    use approx::assert_relative_eq;

    #[test]
    fn same_seed_same_realization() {
        let cfg = scenario::test_config();
        let stats = large_scale_fading(&sample_geometry(&cfg, 1).unwrap(), &cfg);
        let a = draw_channels(&stats, &cfg, 9, 3);
        let b = draw_channels(&stats, &cfg, 9, 3);
        assert_eq!(a, b);
        assert_ne!(a, draw_channels(&stats, &cfg, 9, 4));
    }

    #[test]
    fn empirical_variance_tracks_large_scale_gain() {
        // scalar channel with lambda in {1, 0.25}, one million draws
        let mut cfg = scenario::test_config();
        cfg.n_ul = 1;
        cfg.n_dl = 1;
        cfg.k_ul = 2;
        cfg.k_dl = 1;
        cfg.m = 1;
        cfg.tau1 = 3;
        let stats = ChannelStats {
            lambda_ul: vec![vec![1.0, 0.25]],
            lambda_dl: vec![vec![1.0]],
            lambda_i_user: vec![vec![1.0, 1.0]],
            lambda_i_rau: vec![vec![1.0]],
        };
        let n = 1_000_000;
        let (mut v0, mut v1) = (0.0, 0.0);
        for t in 0..n {
            let r = draw_channels(&stats, &cfg, 100, t);
            v0 += r.g_ul[(0, 0)].norm_sqr();
            v1 += r.g_ul[(0, 1)].norm_sqr();
        }
        assert_relative_eq!(v0 / n as f64, 1.0, max_relative = 0.01);
        assert_relative_eq!(v1 / n as f64, 0.25, max_relative = 0.01);
    }

    #[test]
    fn cross_link_draws_are_uncorrelated() {
        let mut cfg = scenario::test_config();
        cfg.n_ul = 1;
        cfg.n_dl = 1;
        cfg.k_ul = 1;
        cfg.k_dl = 1;
        cfg.m = 1;
        cfg.tau1 = 2;
        cfg.tau2 = 1;
        let stats = ChannelStats {
            lambda_ul: vec![vec![1.0]],
            lambda_dl: vec![vec![1.0]],
            lambda_i_user: vec![vec![1.0]],
            lambda_i_rau: vec![vec![1.0]],
        };
        let n = 100_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..n {
            let r = draw_channels(&stats, &cfg, 77, t);
            acc += r.g_ul[(0, 0)] * r.g_dl[(0, 0)].conj();
        }
        let corr = acc / n as f64;
        // 3-sigma bound for a mean of n unit-variance products
        let bound = 3.0 / (n as f64).sqrt();
        assert!(corr.norm() < bound, "corr {corr}, bound {bound}");
    }
}
