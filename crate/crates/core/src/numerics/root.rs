use super::NumericsError;
use crate::scalar::{lit, Scalar};

const MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` or an exact zero is hit.
pub fn find_root_bracketed<T: Scalar, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<T, NumericsError> {
    if !(tol > T::zero()) {
        return Err(NumericsError::DomainError(format!("tolerance must be positive, got {tol}")));
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::DomainError("function is NaN at a bracket end".into()));
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation or secant
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = lit::<T>(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + tol1.copysign(xm);
        }
        fb = f(b);
        if fb.is_nan() {
            return Err(NumericsError::DomainError("function returned NaN inside the bracket".into()));
        }
    }
    Err(NumericsError::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_quadratic() {
        let r = find_root_bracketed(|x: f64| x - 2.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let r = find_root_bracketed(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn reversed_bracket_and_exact_end() {
        let r = find_root_bracketed(|x: f64| x.powi(3) - 8.0, 5.0, 0.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-11);
        assert_eq!(find_root_bracketed(|x: f64| x, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn same_sign_is_rejected() {
        assert_eq!(find_root_bracketed(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10), Err(NumericsError::NoSignChange));
    }

    #[test]
    fn step_function_still_converges_to_jump() {
        let r = find_root_bracketed(|x: f64| if x < 0.3 { -1.0 } else { 1.0 }, 0.0, 1.0, 1e-10).unwrap();
        assert!((r - 0.3).abs() < 1e-9);
    }
}
