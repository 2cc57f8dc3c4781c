//! Synthetic AR(1)-GJR(1,1) series with exact Pearson IV innovations.
//!
//! Used to build test fixtures with known generating parameters. Innovations
//! are drawn by rejection in the angle variable `θ = atan(σ̂z + μ̂)`, whose
//! density `∝ cos^{m−1}θ · e^{−νθ}` is bounded on `(−π/2, π/2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gjr_garch::GjrParams;
use crate::pearson4::Piv;
use crate::scalar::{lit, Scalar};

/// Exact rejection sampler for a standardized Pearson IV law.
#[derive(Debug, Clone, Copy)]
pub struct PivSampler<T> {
    dist: Piv<T>,
    log_peak: T,
}

impl<T: Scalar> PivSampler<T> {
    pub fn new(dist: Piv<T>) -> Self {
        // mode of (m−1) ln cos θ − νθ is at tan θ = −ν/(m−1) = μ̂
        let theta = dist.mu_hat().atan();
        let log_peak = Self::log_kernel(&dist, theta);
        Self { dist, log_peak }
    }

    fn log_kernel(dist: &Piv<T>, theta: T) -> T {
        (dist.m() - T::one()) * theta.cos().ln() - dist.nu() * theta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let edge = T::FRAC_PI_2();
        loop {
            let u: f64 = rng.random();
            let theta = (lit::<T>(2.0) * lit::<T>(u) - T::one()) * edge;
            if theta.abs() >= edge {
                continue;
            }
            let accept: f64 = rng.random();
            if lit::<T>(accept).ln() <= Self::log_kernel(&self.dist, theta) - self.log_peak {
                return (theta.tan() - self.dist.mu_hat()) / self.dist.sigma_hat();
            }
        }
    }
}

/// `n` returns from the model, after discarding `burn_in` steps.
///
/// The variance starts at `ω / (1 − persistence)`, or `ω / 0.05` when the
/// parameters are not covariance stationary.
pub fn simulate_gjr_piv<T: Scalar>(params: &GjrParams<T>, n: usize, burn_in: usize, seed: u64) -> Vec<T> {
    let dist = params.innovation().expect("valid generating parameters");
    let sampler = PivSampler::new(dist);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = (T::one() - params.persistence()).max(lit(0.05));
    let mut sigma2 = params.omega / gap;
    let mut eps = T::zero();
    let mut r = params.mu / (T::one() - params.phi);
    let mut out = Vec::with_capacity(n);
    for t in 0..n + burn_in {
        sigma2 = params.next_variance(sigma2, eps);
        eps = sigma2.sqrt() * sampler.sample(&mut rng);
        r = params.mu + params.phi * r + eps;
        if t >= burn_in {
            out.push(r);
        }
    }
    out
}
