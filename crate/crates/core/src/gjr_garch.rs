//! AR(1) mean with GJR(1,1) conditional variance and standardized Pearson IV
//! innovations:
//!
//! ```text
//! r_t  = μ + φ r_{t−1} + ε_t,          ε_t = σ_t z_t
//! σ_t² = ω + (a + γ·1{ε_{t−1} < 0}) ε_{t−1}² + β σ_{t−1}²
//! ```
//!
//! Fitting is by maximum likelihood over an unconstrained reparameterization
//! with a multi-start simplex search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{DiagnosticsError, DiagnosticsRow};
use crate::numerics::{minimize_simplex, NumericsError, OptimizerOptions};
use crate::pearson4::{PearsonError, Piv};
use crate::scalar::{from_usize, lit, Scalar};

/// Shortest series `fit` accepts.
pub const MIN_FIT_LENGTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GarchError {
    #[error("return series of length {len} is too short (need at least {need})")]
    TooShort { len: usize, need: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("conditional variance became non-positive or non-finite at t = {0}")]
    NonPositiveVariance(usize),
    #[error("residual pool is empty")]
    EmptyPool,
    #[error("no starting point produced a finite likelihood")]
    NoFiniteStart,
    #[error(transparent)]
    Distribution(#[from] PearsonError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

/// The eight model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjrParams<T> {
    pub mu: T,
    pub phi: T,
    pub omega: T,
    pub alpha: T,
    pub gamma: T,
    pub beta: T,
    pub m: T,
    pub nu: T,
}

impl<T: Scalar> GjrParams<T> {
    pub fn validate(&self) -> Result<(), GarchError> {
        let all = [self.mu, self.phi, self.omega, self.alpha, self.gamma, self.beta, self.m, self.nu];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GarchError::InvalidParams("all parameters must be finite".into()));
        }
        let fail = |msg: &str| Err(GarchError::InvalidParams(msg.into()));
        if !(self.omega > T::zero()) {
            return fail("omega must be positive");
        }
        if self.alpha < T::zero() || self.beta < T::zero() {
            return fail("alpha and beta must be nonnegative");
        }
        if self.alpha + self.gamma < T::zero() {
            return fail("alpha + gamma must be nonnegative");
        }
        if !(self.phi.abs() < T::one()) {
            return fail("|phi| must be below one");
        }
        if !(self.m > lit(2.0)) {
            return fail("m must exceed 2");
        }
        Ok(())
    }

    /// `a + β + γ/2`; covariance stationarity needs this below one.
    pub fn persistence(&self) -> T {
        self.alpha + self.beta + self.gamma * lit(0.5)
    }

    pub fn is_covariance_stationary(&self) -> bool {
        self.persistence() < T::one()
    }

    pub fn innovation(&self) -> Result<Piv<T>, PearsonError> {
        Piv::new(self.m, self.nu)
    }

    /// Next-step variance given the previous variance and innovation.
    #[inline]
    pub fn next_variance(&self, sigma2_prev: T, eps_prev: T) -> T {
        let load = if eps_prev < T::zero() { self.alpha + self.gamma } else { self.alpha };
        self.omega + load * eps_prev * eps_prev + self.beta * sigma2_prev
    }

    /// Maps to the optimizer's unconstrained coordinates; `return_scale`
    /// normalizes the mean constant.
    pub fn to_unconstrained(&self, return_scale: T) -> Vec<T> {
        let tiny = lit::<T>(1e-12);
        vec![
            self.mu / return_scale,
            self.phi.atanh(),
            self.omega.ln(),
            self.alpha.max(tiny).ln(),
            (self.alpha + self.gamma).max(tiny).ln(),
            self.beta.max(tiny).ln(),
            (self.m - lit(2.0)).ln(),
            self.nu,
        ]
    }

    /// Inverse of [`to_unconstrained`](Self::to_unconstrained); `None` when the
    /// vector maps outside the parameter domain (overflow, `m` rounding to 2).
    pub fn from_unconstrained(theta: &[T], return_scale: T) -> Option<Self> {
        if theta.len() != 8 || theta.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let alpha = theta[3].exp();
        let p = Self {
            mu: theta[0] * return_scale,
            phi: theta[1].tanh(),
            omega: theta[2].exp(),
            alpha,
            gamma: theta[4].exp() - alpha,
            beta: theta[5].exp(),
            m: lit::<T>(2.0) + theta[6].exp(),
            nu: theta[7],
        };
        p.validate().ok().map(|_| p)
    }
}

/// Filtered paths over the usable sample `t = 2..T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput<T> {
    pub sigma2: Vec<T>,
    pub eps: Vec<T>,
    pub z: Vec<T>,
    pub log_likelihood: T,
    /// Final observed return, needed to continue the AR(1) mean.
    pub last_return: T,
}

/// State at the end of the sample from which forward paths start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalState<T> {
    pub sigma2: T,
    pub eps: T,
    pub last_return: T,
}

impl<T: Scalar> FilterOutput<T> {
    pub fn terminal_state(&self) -> Option<TerminalState<T>> {
        Some(TerminalState { sigma2: *self.sigma2.last()?, eps: *self.eps.last()?, last_return: self.last_return })
    }
}

fn sample_mean_var<T: Scalar>(x: &[T]) -> (T, T) {
    let n = from_usize::<T>(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    (mean, var)
}

/// Runs the variance recursion over `returns` and accumulates the log-likelihood.
///
/// The recursion is seeded with the sample variance and
/// `ε_1 = r_1 − μ − φ·mean(r)`; the likelihood conditions on the first observation.
pub fn filter<T: Scalar>(returns: &[T], params: &GjrParams<T>) -> Result<FilterOutput<T>, GarchError> {
    if returns.len() < 3 {
        return Err(GarchError::TooShort { len: returns.len(), need: 3 });
    }
    params.validate()?;
    let dist = params.innovation()?;
    let (mean, var) = sample_mean_var(returns);
    let n = returns.len() - 1;
    let mut out = FilterOutput {
        sigma2: Vec::with_capacity(n),
        eps: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        log_likelihood: T::zero(),
        last_return: returns[returns.len() - 1],
    };
    let half = lit::<T>(0.5);
    let mut sigma2_prev = var;
    let mut eps_prev = returns[0] - params.mu - params.phi * mean;
    let mut ll = T::zero();
    for t in 1..returns.len() {
        let sigma2 = params.next_variance(sigma2_prev, eps_prev);
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(GarchError::NonPositiveVariance(t));
        }
        let eps = returns[t] - params.mu - params.phi * returns[t - 1];
        let z = eps / sigma2.sqrt();
        ll = ll + dist.log_pdf(z) - half * sigma2.ln();
        out.sigma2.push(sigma2);
        out.eps.push(eps);
        out.z.push(z);
        sigma2_prev = sigma2;
        eps_prev = eps;
    }
    out.log_likelihood = ll;
    Ok(out)
}

/// Log-likelihood without materializing the filtered paths.
fn log_likelihood<T: Scalar>(returns: &[T], params: &GjrParams<T>, dist: &Piv<T>, mean: T, var: T) -> Option<T> {
    let half = lit::<T>(0.5);
    let mut sigma2_prev = var;
    let mut eps_prev = returns[0] - params.mu - params.phi * mean;
    let mut ll = T::zero();
    for t in 1..returns.len() {
        let sigma2 = params.next_variance(sigma2_prev, eps_prev);
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return None;
        }
        let eps = returns[t] - params.mu - params.phi * returns[t - 1];
        ll = ll + dist.log_pdf(eps / sigma2.sqrt()) - half * sigma2.ln();
        sigma2_prev = sigma2;
        eps_prev = eps;
    }
    ll.is_finite().then_some(ll)
}

/// Negative log-likelihood at the unconstrained vector `theta`; `+∞` outside the domain.
pub fn neg_log_likelihood<T: Scalar>(returns: &[T], theta: &[T]) -> T {
    if returns.len() < 3 {
        return T::infinity();
    }
    let (mean, var) = sample_mean_var(returns);
    Objective { returns, mean, var, scale: var.sqrt() }.eval(theta)
}

struct Objective<'a, T> {
    returns: &'a [T],
    mean: T,
    var: T,
    scale: T,
}

impl<T: Scalar> Objective<'_, T> {
    fn eval(&self, theta: &[T]) -> T {
        let Some(params) = GjrParams::from_unconstrained(theta, self.scale) else {
            return T::infinity();
        };
        let Ok(dist) = params.innovation() else {
            return T::infinity();
        };
        match log_likelihood(self.returns, &params, &dist, self.mean, self.var) {
            Some(ll) => -ll,
            None => T::infinity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub optimizer: OptimizerOptions,
    /// Number of starting points: the default start plus seeded perturbations.
    pub starts: usize,
    /// Simplex restarts from each start's incumbent.
    pub restarts: usize,
    pub seed: u64,
    /// Lag count for the residual whiteness diagnostics.
    pub lags: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            optimizer: OptimizerOptions {
                max_iterations: 4_000,
                tolerance_f: 1e-9,
                tolerance_x: 1e-7,
                initial_simplex_scale: 0.3,
            },
            starts: 5,
            restarts: 4,
            seed: 0x5eed,
            lags: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub params: GjrParams<T>,
    pub filter: FilterOutput<T>,
    pub neg_log_likelihood: T,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// Index of the winning start (0 is the default start).
    pub start_index: usize,
    /// Set when `a + β + γ/2 ≥ 1`.
    pub stationarity_warning: bool,
    /// Whiteness tests on `z` and `z²`.
    pub residual_diagnostics: DiagnosticsRow<T>,
    /// Quadrature mean and variance of the fitted innovation law.
    pub innovation_moments: (T, T),
}

/// Default starting parameters for a return sample.
pub fn default_start<T: Scalar>(returns: &[T]) -> GjrParams<T> {
    let (mean, var) = sample_mean_var(returns);
    GjrParams {
        mu: mean,
        phi: T::zero(),
        omega: lit::<T>(0.05) * var,
        alpha: lit(0.05),
        gamma: T::zero(),
        beta: lit(0.90),
        m: lit(6.0),
        nu: T::zero(),
    }
}

struct StartOutcome<T> {
    theta: Vec<T>,
    value: T,
    converged: bool,
    iterations: usize,
    evaluations: usize,
}

pub fn fit<T: Scalar>(returns: &[T], opts: &FitOptions) -> Result<FitResult<T>, GarchError> {
    if returns.len() < MIN_FIT_LENGTH {
        return Err(GarchError::TooShort { len: returns.len(), need: MIN_FIT_LENGTH });
    }
    opts.optimizer.validate()?;
    let (mean, var) = sample_mean_var(returns);
    if !(var > T::zero()) {
        return Err(GarchError::InvalidParams("return series has zero variance".into()));
    }
    let objective = Objective { returns, mean, var, scale: var.sqrt() };
    let base = default_start(returns).to_unconstrained(objective.scale);

    let starts: Vec<Vec<T>> = (0..opts.starts.max(1))
        .map(|i| {
            if i == 0 {
                return base.clone();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            base.iter().map(|&b| b + lit::<T>(rng.random_range(-0.75..0.75))).collect()
        })
        .collect();

    let outcomes: Vec<Option<StartOutcome<T>>> = starts.par_iter().map(|x0| run_start(&objective, x0, opts)).collect();

    // deterministic merge: lowest NLL, ties to the lowest start index
    let (start_index, best) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (i, o)))
        .fold(None::<(usize, StartOutcome<T>)>, |acc, (i, o)| match acc {
            Some((j, b)) if b.value <= o.value => Some((j, b)),
            _ => Some((i, o)),
        })
        .ok_or(GarchError::NoFiniteStart)?;

    let params = GjrParams::from_unconstrained(&best.theta, objective.scale).ok_or(GarchError::NoFiniteStart)?;
    let filter = filter(returns, &params)?;
    let residual_diagnostics = DiagnosticsRow::for_residuals(&filter.z, opts.lags)?;
    let innovation_moments = params.innovation()?.standardized_moments()?;
    Ok(FitResult {
        params,
        neg_log_likelihood: -filter.log_likelihood,
        filter,
        converged: best.converged,
        iterations: best.iterations,
        evaluations: best.evaluations,
        start_index,
        stationarity_warning: !params.is_covariance_stationary(),
        residual_diagnostics,
        innovation_moments,
    })
}

fn run_start<T: Scalar>(objective: &Objective<'_, T>, x0: &[T], opts: &FitOptions) -> Option<StartOutcome<T>> {
    let f = |x: &[T]| objective.eval(x);
    let mut out = minimize_simplex(f, x0, &opts.optimizer).ok()?;
    let mut total = StartOutcome {
        theta: out.argmin.clone(),
        value: out.value,
        converged: out.converged,
        iterations: out.iterations,
        evaluations: out.evaluations,
    };
    let tol = lit::<T>(opts.optimizer.tolerance_f);
    for _ in 0..opts.restarts {
        out = minimize_simplex(f, &total.theta, &opts.optimizer).ok()?;
        total.iterations += out.iterations;
        total.evaluations += out.evaluations;
        let improved = total.value - out.value;
        if out.value < total.value {
            total.theta = out.argmin;
            total.value = out.value;
        }
        total.converged = out.converged;
        if !(improved > tol) {
            break;
        }
    }
    total.value.is_finite().then_some(total)
}

/// Forward path of daily returns, bootstrapping `z*` uniformly with replacement from `pool`.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    params: &GjrParams<T>,
    state: &TerminalState<T>,
    pool: &[T],
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<T>, GarchError> {
    if pool.is_empty() {
        return Err(GarchError::EmptyPool);
    }
    let mut path = Vec::with_capacity(horizon);
    let (mut sigma2, mut eps, mut r) = (state.sigma2, state.eps, state.last_return);
    for _ in 0..horizon {
        sigma2 = params.next_variance(sigma2, eps);
        let z = pool[rng.random_range(0..pool.len())];
        eps = sigma2.sqrt() * z;
        r = params.mu + params.phi * r + eps;
        path.push(r);
    }
    Ok(path)
}

/// [`simulate`] with a dedicated generator seeded from `seed`.
pub fn simulate_seeded<T: Scalar>(
    params: &GjrParams<T>,
    state: &TerminalState<T>,
    pool: &[T],
    horizon: usize,
    seed: u64,
) -> Result<Vec<T>, GarchError> {
    simulate(params, state, pool, horizon, &mut ChaCha8Rng::seed_from_u64(seed))
}
