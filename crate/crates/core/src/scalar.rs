//! Scalar abstraction for the closed-form engine.
//!
//! The analytical machinery (quantizer coefficients, Gamma moment matching,
//! rate and power expressions) is generic over the floating-point type so the
//! same formulas run in `f32` or `f64`. Simulation code (channel draws, the
//! Monte-Carlo oracle, the solvers) is pinned to `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Natural log of the Gamma function, accurate to ~1e-13 in `f64`.
///
/// Lanczos approximation (g = 7, n = 9) with the reflection formula for
/// arguments below 1/2. Evaluated in the scalar type itself so `f32` callers
/// stay `f32` end to end.
pub fn ln_gamma<F: Real>(x: F) -> F {
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let half = F::of(0.5);
    let one = F::one();
    if x < half {
        // reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        let pi = F::of(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(one - x);
    }
    let x = x - one;
    let mut acc = F::of(COEFFS[0]);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc = acc + F::of(c) / (x + F::of(i as f64));
    }
    let g = F::of(7.5);
    let t = x + g;
    let ln_sqrt_2pi = F::of(0.918_938_533_204_672_74);
    ln_sqrt_2pi + (x + half) * t.ln() - t + acc.ln()
}
