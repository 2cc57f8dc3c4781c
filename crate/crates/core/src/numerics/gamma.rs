use num_complex::Complex;

use super::NumericsError;
use crate::scalar::{from_usize, lit, Scalar};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real<T: Scalar>(x: T) -> Result<T, NumericsError> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(NumericsError::DomainError(format!("ln_gamma_real requires x > 0, got {x}")));
    }
    let half = lit::<T>(0.5);
    if x < half {
        // ln Γ(x) = ln Γ(x + 1) − ln x
        return Ok(lanczos_real(x + T::one()) - x.ln());
    }
    Ok(lanczos_real(x))
}

fn lanczos_real<T: Scalar>(x: T) -> T {
    let half = lit::<T>(0.5);
    let xm1 = x - T::one();
    let mut series = lit::<T>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + lit::<T>(c) / (xm1 + from_usize(i));
    }
    let t = xm1 + lit::<T>(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (xm1 + half) * t.ln() - t + series.ln()
}

/// Log-gamma on the right half-plane, continuous branch through the positive real axis.
pub fn ln_gamma_complex<T: Scalar>(z: Complex<T>) -> Result<Complex<T>, NumericsError> {
    if !(z.re > T::zero()) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(NumericsError::DomainError(format!("ln_gamma_complex requires Re z > 0, got {}+{}i", z.re, z.im)));
    }
    if z.im == T::zero() {
        return ln_gamma_real(z.re).map(|v| Complex::new(v, T::zero()));
    }
    let half = lit::<T>(0.5);
    if z.re < half {
        let shifted = lanczos_complex(z + T::one());
        return Ok(shifted - z.ln());
    }
    Ok(lanczos_complex(z))
}

fn lanczos_complex<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let half = lit::<T>(0.5);
    let zm1 = z - T::one();
    let mut series = Complex::new(lit::<T>(LANCZOS_COEFFS[0]), T::zero());
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + Complex::new(lit::<T>(c), T::zero()) / (zm1 + from_usize::<T>(i));
    }
    let t = zm1 + lit::<T>(LANCZOS_G) + half;
    let head = Complex::new(half * T::TAU().ln(), T::zero());
    head + (zm1 + half) * t.ln() - t + series.ln()
}
