//! Descriptive statistics and specification tests for return series:
//! moments, Jarque–Bera, Ljung–Box, Engle's ARCH-LM and cross-asset correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::ReturnSeries;
use crate::numerics::{chi2_sf, f_sf, NumericsError};
use crate::scalar::{from_usize, lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("series of length {len} is too short (need at least {need})")]
    TooShort { len: usize, need: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("auxiliary regression is singular")]
    SingularRegression,
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn need(len: usize, need: usize) -> Result<(), DiagnosticsError> {
    if len < need {
        Err(DiagnosticsError::TooShort { len, need })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub mean: T,
    /// Sample standard deviation, `N − 1` divisor.
    pub std: T,
    pub skewness: T,
    /// Raw kurtosis (3 for a normal law).
    pub kurtosis: T,
}

/// Statistic and its upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub stat: T,
    pub p: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchLmResult<T> {
    /// `N_eff · R²`, chi-square with `lags` dof.
    pub lm: TestResult<T>,
    /// Regression F statistic with `(lags, N_eff − lags − 1)` dof.
    pub f: TestResult<T>,
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / from_usize(x.len())
}

/// Central moments use the `1/N` convention; `std` uses `1/(N − 1)`.
pub fn moments<T: Scalar>(x: &[T]) -> Result<Moments<T>, DiagnosticsError> {
    need(x.len(), 4)?;
    let n = from_usize::<T>(x.len());
    let mu = mean(x);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in x {
        let d = v - mu;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    if m2 <= T::zero() {
        return Err(DiagnosticsError::ZeroVariance);
    }
    let std = (m2 / (n - T::one())).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Ok(Moments { mean: mu, std, skewness: m3 / m2.powf(lit(1.5)), kurtosis: m4 / (m2 * m2) })
}

/// Two-sided normal p-value of `stat / se`, via the chi-square(1) tail.
fn normal_two_sided<T: Scalar>(stat: T, se: T) -> Result<T, DiagnosticsError> {
    let z = stat / se;
    Ok(chi2_sf(z * z, 1)?)
}

/// Asymptotic significance of sample skewness (`se = √(6/N)`).
pub fn skewness_p<T: Scalar>(skewness: T, n: usize) -> Result<T, DiagnosticsError> {
    normal_two_sided(skewness, (lit::<T>(6.0) / from_usize(n)).sqrt())
}

/// Asymptotic significance of excess kurtosis (`se = √(24/N)`).
pub fn kurtosis_p<T: Scalar>(kurtosis: T, n: usize) -> Result<T, DiagnosticsError> {
    normal_two_sided(kurtosis - lit(3.0), (lit::<T>(24.0) / from_usize(n)).sqrt())
}

/// Jarque–Bera normality test, `N/6 · (S² + (K − 3)²/4)` against chi-square(2).
pub fn jarque_bera<T: Scalar>(x: &[T]) -> Result<TestResult<T>, DiagnosticsError> {
    need(x.len(), 8)?;
    let m = moments(x)?;
    Ok(jarque_bera_from_moments(m.skewness, m.kurtosis, x.len())?)
}

pub fn jarque_bera_from_moments<T: Scalar>(skewness: T, kurtosis: T, n: usize) -> Result<TestResult<T>, NumericsError> {
    let ek = kurtosis - lit(3.0);
    let stat = from_usize::<T>(n) / lit(6.0) * (skewness * skewness + ek * ek / lit(4.0));
    Ok(TestResult { stat, p: chi2_sf(stat, 2)? })
}

/// Sample autocorrelations at lags `1..=lags`.
pub fn autocorrelations<T: Scalar>(x: &[T], lags: usize) -> Result<Vec<T>, DiagnosticsError> {
    need(x.len(), lags + 2)?;
    let mu = mean(x);
    let dev: Vec<T> = x.iter().map(|&v| v - mu).collect();
    let denom: T = dev.iter().map(|&d| d * d).sum();
    if denom <= T::zero() {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((1..=lags)
        .map(|k| dev[k..].iter().zip(&dev[..dev.len() - k]).map(|(&a, &b)| a * b).sum::<T>() / denom)
        .collect())
}

/// Ljung–Box portmanteau statistic on `x` as given (square the input for the
/// squared-series variant).
pub fn ljung_box<T: Scalar>(x: &[T], lags: usize) -> Result<TestResult<T>, DiagnosticsError> {
    if lags == 0 {
        return Err(DiagnosticsError::TooShort { len: 0, need: 1 });
    }
    let rho = autocorrelations(x, lags)?;
    let n = from_usize::<T>(x.len());
    let q = rho.iter().enumerate().map(|(i, &r)| r * r / (n - from_usize(i + 1))).sum::<T>() * n * (n + lit(2.0));
    Ok(TestResult { stat: q, p: chi2_sf(q, lags)? })
}

/// Engle's ARCH-LM test: regress squared demeaned values on `lags` of their own lags.
#[allow(clippy::needless_range_loop)]
pub fn arch_lm<T: Scalar>(x: &[T], lags: usize) -> Result<ArchLmResult<T>, DiagnosticsError> {
    if lags == 0 {
        return Err(DiagnosticsError::TooShort { len: 0, need: 1 });
    }
    need(x.len(), 2 * lags + 1)?;
    let mu = mean(x);
    let sq: Vec<T> = x.iter().map(|&v| (v - mu) * (v - mu)).collect();
    let rows = sq.len() - lags;
    let k = lags + 1;
    let sq_ref = &sq;
    let regressors = move |t: usize| std::iter::once(T::one()).chain((1..=lags).map(move |j| sq_ref[t - j]));

    let mut xtx = vec![vec![T::zero(); k]; k];
    let mut xty = vec![T::zero(); k];
    for t in lags..sq.len() {
        let row: Vec<T> = regressors(t).collect();
        for i in 0..k {
            xty[i] = xty[i] + row[i] * sq[t];
            for j in 0..k {
                xtx[i][j] = xtx[i][j] + row[i] * row[j];
            }
        }
    }
    let coef = solve_symmetric(xtx, xty)?;
    let y = &sq[lags..];
    let y_mean = mean(y);
    let sst: T = y.iter().map(|&v| (v - y_mean) * (v - y_mean)).sum();
    if sst <= T::zero() {
        return Err(DiagnosticsError::SingularRegression);
    }
    let ssr: T = (lags..sq.len())
        .map(|t| {
            let fitted: T = regressors(t).zip(&coef).map(|(r, c)| r * *c).sum();
            (sq[t] - fitted) * (sq[t] - fitted)
        })
        .sum();
    let r2 = (T::one() - ssr / sst).max(T::zero()).min(T::one());
    let n_eff = from_usize::<T>(rows);
    let lm = n_eff * r2;
    let df2 = rows.saturating_sub(k).max(1);
    let f = if r2 < T::one() { (r2 / from_usize(lags)) / ((T::one() - r2) / from_usize(df2)) } else { T::infinity() };
    let f_p = if f.is_finite() { f_sf(f, lags, df2)? } else { T::zero() };
    Ok(ArchLmResult { lm: TestResult { stat: lm, p: chi2_sf(lm, lags)? }, f: TestResult { stat: f, p: f_p } })
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_symmetric<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>, DiagnosticsError> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    let threshold = scale * T::epsilon() * from_usize::<T>(n * 16);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty");
        if !(a[pivot][col].abs() > threshold) {
            return Err(DiagnosticsError::SingularRegression);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] = a[row][c] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

pub fn pearson_correlation<T: Scalar>(x: &[T], y: &[T]) -> Result<T, DiagnosticsError> {
    if x.len() != y.len() {
        return Err(DiagnosticsError::LengthMismatch(x.len(), y.len()));
    }
    need(x.len(), 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}

/// Symmetric matrix of pairwise Pearson correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub asset_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.asset_ids.iter().position(|s| s == a)?;
        let j = self.asset_ids.iter().position(|s| s == b)?;
        Some(self.values[i][j])
    }

    /// Off-diagonal pairs sorted by descending correlation.
    pub fn ranked_pairs(&self) -> Vec<(String, String, f64)> {
        let n = self.asset_ids.len();
        let mut pairs: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.asset_ids[i].clone(), self.asset_ids[j].clone(), self.values[i][j]))
            .collect();
        pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
        pairs
    }
}

pub fn correlation_matrix(panel: &[ReturnSeries]) -> Result<CorrelationMatrix, DiagnosticsError> {
    let n = panel.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = pearson_correlation(&panel[i].returns, &panel[j].returns)?;
            values[i][j] = c;
            values[j][i] = c;
        }
        if n == 1 {
            moments(&panel[i].returns)?;
        }
    }
    Ok(CorrelationMatrix { asset_ids: panel.iter().map(|s| s.asset_id.clone()).collect(), values })
}

/// One row of descriptive statistics and specification tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow<T> {
    pub n: usize,
    pub mean: T,
    pub std: T,
    pub skewness: T,
    pub skewness_p: T,
    pub kurtosis: T,
    pub kurtosis_p: T,
    pub jb_stat: T,
    pub jb_p: T,
    /// ARCH-LM `N·R²` statistic.
    pub arch_stat: T,
    pub arch_p: T,
    pub arch_f_stat: T,
    pub arch_f_p: T,
    pub lb_stat: T,
    pub lb_p: T,
    pub lb2_stat: T,
    pub lb2_p: T,
    pub lags: usize,
}

impl<T: Scalar> DiagnosticsRow<T> {
    /// Table row for a return series: squared-series tests use squared demeaned returns.
    pub fn for_returns(x: &[T], lags: usize) -> Result<Self, DiagnosticsError> {
        need(x.len(), 2 * lags + 1)?;
        let mu = mean(x);
        let squares: Vec<T> = x.iter().map(|&v| (v - mu) * (v - mu)).collect();
        Self::build(x, &squares, lags)
    }

    /// Whiteness check for standardized residuals: squared-series tests use `z²`.
    pub fn for_residuals(z: &[T], lags: usize) -> Result<Self, DiagnosticsError> {
        let squares: Vec<T> = z.iter().map(|&v| v * v).collect();
        Self::build(z, &squares, lags)
    }

    fn build(x: &[T], squares: &[T], lags: usize) -> Result<Self, DiagnosticsError> {
        need(x.len(), (2 * lags + 1).max(8))?;
        let n = x.len();
        let m = moments(x)?;
        let jb = jarque_bera_from_moments(m.skewness, m.kurtosis, n)?;
        let arch = arch_lm(x, lags)?;
        let lb = ljung_box(x, lags)?;
        let lb2 = ljung_box(squares, lags)?;
        Ok(Self {
            n,
            mean: m.mean,
            std: m.std,
            skewness: m.skewness,
            skewness_p: skewness_p(m.skewness, n)?,
            kurtosis: m.kurtosis,
            kurtosis_p: kurtosis_p(m.kurtosis, n)?,
            jb_stat: jb.stat,
            jb_p: jb.p,
            arch_stat: arch.lm.stat,
            arch_p: arch.lm.p,
            arch_f_stat: arch.f.stat,
            arch_f_p: arch.f.p,
            lb_stat: lb.stat,
            lb_p: lb.p,
            lb2_stat: lb2.stat,
            lb2_p: lb2.p,
            lags,
        })
    }
}
