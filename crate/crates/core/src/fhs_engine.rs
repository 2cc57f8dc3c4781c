//! Filtered historical simulation and the sample risk measures.
//!
//! Each trial bootstraps standardized residuals through the fitted variance
//! recursion for `horizon` days starting from the end-of-sample state, and
//! records the cumulative log return. VaR is the negated `k`-th smallest
//! outcome and ES the negated mean of the `k` smallest, with
//! `k = ⌊level · N⌋` for both.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gjr_garch::{simulate, FitResult, GarchError, GjrParams, TerminalState};
use crate::pearson4::{PearsonError, Piv};
use crate::scalar::{from_usize, lit, Scalar};

/// Smallest trial count a [`RiskSpec`] accepts.
pub const MIN_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FhsError {
    #[error("invalid risk spec: {0}")]
    InvalidSpec(String),
    #[error("fit carries no standardized residuals")]
    EmptyResiduals,
    #[error("level {level} leaves no tail observation among {trials} outcomes")]
    TooFewTrials { level: f64, trials: usize },
    #[error("tail probability must lie in (0, 0.5), got {0}")]
    ProbabilityOutOfDomain(f64),
    #[error("report lacks level {0}")]
    MissingLevel(f64),
    #[error(transparent)]
    Model(#[from] GarchError),
    #[error(transparent)]
    Distribution(#[from] PearsonError),
}

/// Tail probabilities, horizon, trial count and master seed of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub levels: Vec<f64>,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RiskSpec {
    fn default() -> Self {
        Self { levels: vec![0.10, 0.05, 0.025, 0.01], horizon: 10, trials: 100_000, seed: 42 }
    }
}

impl RiskSpec {
    pub fn validate(&self) -> Result<(), FhsError> {
        if self.levels.is_empty() {
            return Err(FhsError::InvalidSpec("at least one level is required".into()));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 0.5)) {
            return Err(FhsError::InvalidSpec(format!("level {l} outside (0, 0.5)")));
        }
        if self.horizon == 0 {
            return Err(FhsError::InvalidSpec("horizon must be at least one day".into()));
        }
        if self.trials < MIN_TRIALS {
            return Err(FhsError::InvalidSpec(format!("trials must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        for &l in &self.levels {
            tail_count(l, self.trials)?;
        }
        Ok(())
    }
}

/// Cumulative horizon log returns, one per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSample<T> {
    pub cum_returns: Vec<T>,
    pub horizon: usize,
    pub seed: u64,
}

/// Number of tail observations, `⌊level · n⌋`.
///
/// The product is nudged up by a few ulps so that decimal levels such as
/// `0.01 · 100000` land on the intended integer.
pub fn tail_count(level: f64, n: usize) -> Result<usize, FhsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(FhsError::ProbabilityOutOfDomain(level));
    }
    let k = (level * n as f64 * (1.0 + 8.0 * f64::EPSILON)).floor() as usize;
    if k == 0 {
        return Err(FhsError::TooFewTrials { level, trials: n });
    }
    Ok(k)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// FHS from an explicit model, terminal state and residual pool.
///
/// Trial `i` draws from its own stream derived from `(seed, i)`, so the
/// result does not depend on how trials are scheduled across threads.
pub fn simulate_paths<T: Scalar>(
    params: &GjrParams<T>,
    state: &TerminalState<T>,
    pool: &[T],
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<SimulatedSample<T>, FhsError> {
    if pool.is_empty() {
        return Err(FhsError::EmptyResiduals);
    }
    let cum_returns = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            simulate(params, state, pool, horizon, &mut rng).map(|path| path.into_iter().sum::<T>())
        })
        .collect::<Result<Vec<T>, GarchError>>()?;
    Ok(SimulatedSample { cum_returns, horizon, seed })
}

pub fn run_fhs<T: Scalar>(fit: &FitResult<T>, spec: &RiskSpec) -> Result<SimulatedSample<T>, FhsError> {
    spec.validate()?;
    let state = fit.filter.terminal_state().ok_or(FhsError::EmptyResiduals)?;
    simulate_paths(&fit.params, &state, &fit.filter.z, spec.horizon, spec.trials, spec.seed)
}

fn sorted<T: Scalar>(sample: &[T]) -> Vec<T> {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

fn var_sorted<T: Scalar>(ascending: &[T], k: usize) -> T {
    -ascending[k - 1]
}

fn es_sorted<T: Scalar>(ascending: &[T], k: usize) -> T {
    -(ascending[..k].iter().copied().sum::<T>() / from_usize(k))
}

/// Value-at-Risk as a positive loss; a gain at the quantile comes out negative.
pub fn var_from_sample<T: Scalar>(sample: &[T], level: f64) -> Result<T, FhsError> {
    let k = tail_count(level, sample.len())?;
    Ok(var_sorted(&sorted(sample), k))
}

/// Expected Shortfall: negated average of the `k` worst outcomes.
pub fn es_from_sample<T: Scalar>(sample: &[T], level: f64) -> Result<T, FhsError> {
    let k = tail_count(level, sample.len())?;
    Ok(es_sorted(&sorted(sample), k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEntry<T> {
    pub level: f64,
    pub var: T,
    pub es: T,
}

/// VaR and ES at each level from one sort of the sample.
pub fn risk_entries<T: Scalar>(sample: &[T], levels: &[f64]) -> Result<Vec<RiskEntry<T>>, FhsError> {
    let asc = sorted(sample);
    levels
        .iter()
        .map(|&level| {
            let k = tail_count(level, asc.len())?;
            Ok(RiskEntry { level, var: var_sorted(&asc, k), es: es_sorted(&asc, k) })
        })
        .collect()
}

/// Per-asset VaR / ES table for one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport<T> {
    pub asset_id: String,
    pub entries: Vec<RiskEntry<T>>,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    /// `|VaR(0.01) − ES(0.025)| / ES(0.025)` when both levels are present.
    pub basel_gap: Option<T>,
}

impl<T: Scalar> RiskReport<T> {
    pub fn from_sample(
        asset_id: impl Into<String>,
        sample: &SimulatedSample<T>,
        spec: &RiskSpec,
    ) -> Result<Self, FhsError> {
        let entries = risk_entries(&sample.cum_returns, &spec.levels)?;
        let mut report = Self {
            asset_id: asset_id.into(),
            entries,
            horizon: sample.horizon,
            trials: sample.cum_returns.len(),
            seed: sample.seed,
            basel_gap: None,
        };
        report.basel_gap = basel_consistency(&report).ok();
        Ok(report)
    }

    pub fn entry(&self, level: f64) -> Option<&RiskEntry<T>> {
        self.entries.iter().find(|e| (e.level - level).abs() < 1e-12)
    }
}

/// Relative gap between the 1% VaR and the 2.5% ES.
pub fn basel_consistency<T: Scalar>(report: &RiskReport<T>) -> Result<T, FhsError> {
    let var = report.entry(0.01).ok_or(FhsError::MissingLevel(0.01))?.var;
    let es = report.entry(0.025).ok_or(FhsError::MissingLevel(0.025))?.es;
    Ok(basel_gap(var, es))
}

pub fn basel_gap<T: Scalar>(var_1pct: T, es_2_5pct: T) -> T {
    (var_1pct - es_2_5pct).abs() / es_2_5pct
}

/// Conditional mean `μ + φ r_T` and volatility `σ_{T+1}` one day past the sample.
pub fn one_step_forecast<T: Scalar>(fit: &FitResult<T>) -> Result<(T, T), FhsError> {
    let state = fit.filter.terminal_state().ok_or(FhsError::EmptyResiduals)?;
    let p = &fit.params;
    let sigma2 = p.next_variance(state.sigma2, state.eps);
    Ok((p.mu + p.phi * state.last_return, sigma2.sqrt()))
}

/// One-day parametric VaR, `−(mean + F⁻¹(level) · sigma)`.
pub fn parametric_var<T: Scalar>(dist: &Piv<T>, level: f64, mean: T, sigma: T) -> Result<T, FhsError> {
    if !(level > 0.0 && level <= 0.5) {
        return Err(FhsError::ProbabilityOutOfDomain(level));
    }
    let q = dist.inv_cdf(lit(level))?;
    Ok(-(mean + q * sigma))
}

pub fn parametric_var_from_fit<T: Scalar>(fit: &FitResult<T>, level: f64) -> Result<T, FhsError> {
    let (mean, sigma) = one_step_forecast(fit)?;
    parametric_var(&fit.params.innovation()?, level, mean, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize, lo: f64, step: f64) -> Vec<f64> {
        (0..n).map(|i| lo + step * i as f64).collect()
    }

    #[test]
    fn tail_counts() {
        assert_eq!(tail_count(0.02, 100).unwrap(), 2);
        assert_eq!(tail_count(0.01, 100_000).unwrap(), 1000);
        assert_eq!(tail_count(0.025, 100_000).unwrap(), 2500);
        assert_eq!(tail_count(0.1, 100_000).unwrap(), 10_000);
        assert_eq!(tail_count(0.05, 100_000).unwrap(), 5000);
        assert_eq!(tail_count(0.019, 100).unwrap(), 1);
        assert!(matches!(tail_count(0.005, 100), Err(FhsError::TooFewTrials { .. })));
    }

    #[test]
    fn var_on_hand_built_sample() {
        let mut s = vec![-0.10, -0.05, 0.0, 0.05];
        s.extend(grid(96, 0.06, 0.01));
        assert!((var_from_sample(&s, 0.02).unwrap() - 0.05).abs() < 1e-15);
        let gains = grid(100, 0.01, 0.01);
        assert!(var_from_sample(&gains, 0.05).unwrap() < 0.0);
        assert!(matches!(var_from_sample(&gains, 0.001), Err(FhsError::TooFewTrials { .. })));
    }

    #[test]
    fn es_on_hand_built_samples() {
        let mut s = vec![-0.20, -0.10];
        s.extend(grid(98, 0.0, 0.001));
        assert!((es_from_sample(&s, 0.02).unwrap() - 0.15).abs() < 1e-15);
        // k = 1: ES is the single worst outcome, same as VaR
        assert_eq!(es_from_sample(&s, 0.01).unwrap(), var_from_sample(&s, 0.01).unwrap());
        let uniform = grid(100, -1.0, 0.01);
        assert!((es_from_sample(&uniform, 0.05).unwrap() - 0.98).abs() < 1e-12);
    }

    #[test]
    fn basel_gap_arithmetic() {
        assert!((basel_gap(19.239_f64, 20.460) - 0.0597).abs() < 1e-4);
        assert!((basel_gap(52.057_f64, 60.227) - 0.1357).abs() < 1e-4);
        assert_eq!(basel_gap(3.0_f64, 3.0), 0.0);
        let report = RiskReport::<f64> {
            asset_id: "X".into(),
            entries: vec![RiskEntry { level: 0.05, var: 1.0, es: 2.0 }],
            horizon: 10,
            trials: 1000,
            seed: 0,
            basel_gap: None,
        };
        assert_eq!(basel_consistency(&report), Err(FhsError::MissingLevel(0.01)));
    }

    #[test]
    fn spec_validation() {
        assert!(RiskSpec::default().validate().is_ok());
        for bad in [
            RiskSpec { trials: 999, ..RiskSpec::default() },
            RiskSpec { horizon: 0, ..RiskSpec::default() },
            RiskSpec { levels: vec![0.5], ..RiskSpec::default() },
            RiskSpec { levels: vec![], ..RiskSpec::default() },
            RiskSpec { levels: vec![0.0001], trials: 1000, ..RiskSpec::default() },
        ] {
            assert!(matches!(bad.validate(), Err(FhsError::InvalidSpec(_)) | Err(FhsError::TooFewTrials { .. })));
        }
    }

    fn toy_model() -> (GjrParams<f64>, TerminalState<f64>) {
        (
            GjrParams { mu: 0.001, phi: 0.1, omega: 1e-5, alpha: 0.1, gamma: 0.05, beta: 0.85, m: 4.0, nu: 0.2 },
            TerminalState { sigma2: 4e-4, eps: -0.01, last_return: -0.012 },
        )
    }

    #[test]
    fn degenerate_pool_gives_mean_path() {
        let (p, state) = toy_model();
        let s = simulate_paths(&p, &state, &[0.0], 10, 2000, 1).unwrap();
        let mut r = state.last_return;
        let mut want = 0.0;
        for _ in 0..10 {
            r = p.mu + p.phi * r;
            want += r;
        }
        assert!(s.cum_returns.iter().all(|&c| c == s.cum_returns[0]));
        assert!((s.cum_returns[0] - want).abs() < 1e-15);
        assert_eq!(simulate_paths(&p, &state, &[], 10, 10, 1), Err(FhsError::EmptyResiduals));
    }

    #[test]
    fn thread_count_does_not_change_sample() {
        let (p, state) = toy_model();
        let pool: Vec<f64> = (0..500).map(|i| ((i * 37 % 500) as f64 - 250.0) / 120.0).collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_paths(&p, &state, &pool, 10, 5000, 99).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_ne!(one, simulate_paths(&p, &state, &pool, 10, 5000, 100).unwrap());
    }

    #[test]
    fn parametric_var_values() {
        let sym = Piv::new(5.0_f64, 0.0).unwrap();
        assert!(parametric_var(&sym, 0.5, 0.0, 1.0).unwrap().abs() < 1e-8);
        let v = parametric_var(&sym, 0.05, 0.0, 0.02).unwrap();
        assert!((v - 0.02 * 1.560_849_758_344_229).abs() < 1e-9, "{v}");
        assert!(matches!(parametric_var(&sym, 0.0, 0.0, 1.0), Err(FhsError::ProbabilityOutOfDomain(_))));
    }

    fn brute_force(sample: &[f64], level: f64) -> (f64, f64) {
        let mut v = sample.to_vec();
        v.sort_by(f64::total_cmp);
        let k = (level * v.len() as f64 + 1e-9).floor() as usize;
        let mut tail = 0.0;
        for x in &v[..k] {
            tail += x;
        }
        (-v[k - 1], -tail / k as f64)
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_orders(sample in prop::collection::vec(-1.0f64..1.0, 50..500)) {
            let levels = [0.10, 0.05, 0.025, 0.02];
            let entries = risk_entries(&sample, &levels).unwrap();
            for e in &entries {
                let (v, es) = brute_force(&sample, e.level);
                prop_assert_eq!(e.var, v);
                prop_assert_eq!(e.es, es);
                prop_assert!(e.es >= e.var);
            }
            for w in entries.windows(2) {
                prop_assert!(w[1].var >= w[0].var && w[1].es >= w[0].es);
            }
        }

        #[test]
        fn translation_and_scaling(sample in prop::collection::vec(-1.0f64..1.0, 100..300), c in -0.5f64..0.5, lam in 0.1f64..10.0) {
            let shifted: Vec<f64> = sample.iter().map(|x| x + c).collect();
            let scaled: Vec<f64> = sample.iter().map(|x| x * lam).collect();
            for level in [0.1, 0.05] {
                let (v, e) = (var_from_sample(&sample, level).unwrap(), es_from_sample(&sample, level).unwrap());
                prop_assert!((var_from_sample(&shifted, level).unwrap() - (v - c)).abs() < 1e-12);
                prop_assert!((es_from_sample(&shifted, level).unwrap() - (e - c)).abs() < 1e-12);
                prop_assert!((var_from_sample(&scaled, level).unwrap() - lam * v).abs() < 1e-12 * lam);
                prop_assert!((es_from_sample(&scaled, level).unwrap() - lam * e).abs() < 1e-12 * lam);
            }
        }
    }
}
