//! Gamma moment-matching toolkit: sums of chi-square channel powers are
//! approximated by a single Gamma variate with the exact mean and variance,
//! and the mean of the square root (a Nakagami envelope mean) is evaluated
//! through log-Gamma differences.

use crate::error::{Error, Result};
use crate::scalar::{ln_gamma, Real};

/// Shape/scale parameters of a Gamma distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair<F: Real> {
    pub shape: F,
    pub scale: F,
}

impl<F: Real> GammaPair<F> {
    pub fn new(shape: F, scale: F) -> Self {
        Self { shape, scale }
    }

    pub fn mean(&self) -> F {
        self.shape * self.scale
    }

    pub fn variance(&self) -> F {
        self.shape * self.scale * self.scale
    }
}

/// Moment-matches the sum of independent `Gamma(m_i, sigma2_i)` powers
/// (each the squared norm of an `m_i`-dimensional complex Gaussian with
/// per-entry variance `sigma2_i`). Mean and variance of the true sum are
/// preserved exactly.
pub fn gamma_sum<F: Real>(components: &[(usize, F)]) -> Result<GammaPair<F>> {
    if components.is_empty() {
        return Err(Error::InvalidArgument(
            "gamma_sum needs at least one component".into(),
        ));
    }
    let mut mean = F::zero();
    let mut var = F::zero();
    for &(m, sigma2) in components {
        if m < 1 || !(sigma2 > F::zero()) {
            return Err(Error::InvalidArgument(
                "gamma_sum components need m >= 1 and sigma2 > 0".into(),
            ));
        }
        let m = F::of(m as f64);
        mean = mean + m * sigma2;
        var = var + m * sigma2 * sigma2;
    }
    Ok(GammaPair {
        shape: mean * mean / var,
        scale: var / mean,
    })
}

/// Power of an `m`-dimensional vector with `Gamma(shape, scale)` squared
/// norm after projection onto an `s`-dimensional subspace: the shape scales
/// by `s/m`, the scale is unchanged.
pub fn gamma_project<F: Real>(pair: GammaPair<F>, m: usize, s: usize) -> Result<GammaPair<F>> {
    if s < 1 || s > m {
        return Err(Error::InvalidArgument(format!(
            "projection dimension {s} must lie in [1, {m}]"
        )));
    }
    Ok(GammaPair {
        shape: pair.shape * F::of(s as f64) / F::of(m as f64),
        scale: pair.scale,
    })
}

/// Mean of the square root of a `Gamma(shape, scale)` variate:
/// `Gamma(k + 1/2) / Gamma(k) * sqrt(scale)`, evaluated via log-Gamma so
/// shapes far beyond 170 stay finite.
pub fn nakagami_mean<F: Real>(pair: GammaPair<F>) -> Result<F> {
    if !(pair.shape > F::zero() && pair.scale > F::zero()) {
        return Err(Error::InvalidArgument(
            "Gamma parameters must be strictly positive".into(),
        ));
    }
    let half = F::of(0.5);
    let log_ratio = ln_gamma(pair.shape + half) - ln_gamma(pair.shape);
    Ok(log_ratio.exp() * pair.scale.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma as GammaDist};

    #[test]
    fn identical_components_add_shapes() {
        let g: GammaPair<f64> = gamma_sum(&[(4, 1.0), (4, 1.0)]).unwrap();
        assert_relative_eq!(g.shape, 8.0);
        assert_relative_eq!(g.scale, 1.0);
    }

    #[test]
    fn mixed_components_preserve_moments() {
        let g: GammaPair<f64> = gamma_sum(&[(2, 1.0), (2, 3.0)]).unwrap();
        assert_relative_eq!(g.shape, 3.2);
        assert_relative_eq!(g.scale, 2.5);
        assert_relative_eq!(g.mean(), 8.0); // 2*(1+3)
        assert_relative_eq!(g.variance(), 2.0 * 1.0 + 2.0 * 9.0);
    }

    #[test]
    fn single_component_is_identity() {
        let g: GammaPair<f64> = gamma_sum(&[(7, 0.3)]).unwrap();
        assert_relative_eq!(g.shape, 7.0);
        assert_relative_eq!(g.scale, 0.3);
    }

    #[test]
    fn empty_list_rejected() {
        assert!(gamma_sum::<f64>(&[]).is_err());
    }

    #[test]
    fn projection_scales_shape_only() {
        let g = GammaPair::new(10.0_f64, 2.0);
        assert_eq!(gamma_project(g, 10, 10).unwrap(), g);
        let p = gamma_project(g, 10, 1).unwrap();
        assert_relative_eq!(p.shape, 1.0);
        assert_relative_eq!(p.scale, 2.0);
        assert!(gamma_project(g, 10, 0).is_err());
        assert!(gamma_project(g, 10, 11).is_err());
    }

    #[test]
    fn nakagami_mean_known_values() {
        // k=1: Γ(3/2)/Γ(1) = √π/2
        let m = nakagami_mean(GammaPair::new(1.0_f64, 1.0)).unwrap();
        assert_relative_eq!(m, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-12);
        // k=2: Γ(2.5)/Γ(2) = 3√π/4
        let m = nakagami_mean(GammaPair::new(2.0_f64, 1.0)).unwrap();
        assert_relative_eq!(m, 1.3293403881791372, epsilon = 1e-10);
    }

    #[test]
    fn nakagami_mean_sampling_oracle() {
        // 10^6-sample mean of sqrt(Gamma(2, 1))
        let dist = GammaDist::new(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let emp: f64 =
            (0..n).map(|_| f64::sqrt(dist.sample(&mut rng))).sum::<f64>() / n as f64;
        let analytic = nakagami_mean(GammaPair::new(2.0_f64, 1.0)).unwrap();
        assert_relative_eq!(emp, analytic, max_relative = 0.005);
    }

    #[test]
    fn nakagami_mean_large_shape_asymptotic() {
        let k = 1.0e4_f64;
        let m = nakagami_mean(GammaPair::new(k, 1.0)).unwrap();
        let asymptotic = k.sqrt() * (1.0 - 1.0 / (8.0 * k));
        assert_relative_eq!(m, asymptotic, max_relative = 1e-4);
        assert!(m.is_finite());
    }

    #[test]
    fn projected_power_sampling_oracle() {
        // Gamma(M*N, theta) total power; projecting the underlying vector
        // onto a random 1-D direction keeps scale and divides shape by M*N.
        let (mn, theta) = (20usize, 0.7_f64);
        let projected = gamma_project(GammaPair::new(mn as f64, theta), mn, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            // isotropic complex Gaussian vector and an independent direction
            let v: Vec<num_complex::Complex64> = (0..mn)
                .map(|_| {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    num_complex::Complex64::new(re, im) * (theta / 2.0).sqrt()
                })
                .collect();
            let mut w: Vec<num_complex::Complex64> = (0..mn)
                .map(|_| {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    num_complex::Complex64::new(re, im)
                })
                .collect();
            let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for x in &mut w {
                *x /= norm;
            }
            let inner: num_complex::Complex64 =
                v.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
            acc += inner.norm_sqr();
        }
        let emp = acc / trials as f64;
        assert_relative_eq!(emp, projected.mean(), max_relative = 0.02);
    }

    proptest! {
        #[test]
        fn moment_preservation(
            comps in proptest::collection::vec((1usize..6, 1e-6f64..10.0), 1..6)
        ) {
            let g: GammaPair<f64> = gamma_sum(&comps).unwrap();
            let mean: f64 = comps.iter().map(|&(m, s)| m as f64 * s).sum();
            let var: f64 = comps.iter().map(|&(m, s)| m as f64 * s * s).sum();
            prop_assert!((g.mean() - mean).abs() <= 1e-9 * mean);
            prop_assert!((g.variance() - var).abs() <= 1e-9 * var);
        }

        #[test]
        fn jensen_bound_strict(k in 0.1f64..200.0, theta in 1e-3f64..100.0) {
            let m = nakagami_mean(GammaPair::new(k, theta)).unwrap();
            prop_assert!(m * m < k * theta);
        }
    }
}
