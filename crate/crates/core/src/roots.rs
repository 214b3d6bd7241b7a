//! Bracketing root finders used throughout. Everything is plain bisection:
//! the callers only need sign information to be right.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign, to
/// bracket width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Convergence(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..400 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Walk from `start` in direction `dir` (±1) with geometrically growing steps
/// until `pred` holds. Returns `(last point where pred failed, first point where it held)`.
pub fn expand_until(
    start: f64,
    dir: f64,
    first_step: f64,
    pred: impl Fn(f64) -> bool,
) -> Result<(f64, f64)> {
    let mut inner = start;
    let mut step = first_step;
    for _ in 0..200 {
        let outer = inner + dir * step;
        if pred(outer) {
            return Ok((inner, outer));
        }
        inner = outer;
        step *= 2.0;
        if !inner.is_finite() {
            break;
        }
    }
    Err(Error::Convergence(format!(
        "bracket expansion from {start} did not terminate"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn either_orientation() {
        let r = bisect(|x| 1.0 - x, 0.0, 3.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn expansion_brackets() {
        let (a, b) = expand_until(0.0, 1.0, 1.0, |x| x > 10.0).unwrap();
        assert!(a <= 10.0 && b > 10.0);
        let (a, b) = expand_until(0.0, -1.0, 0.5, |x| x < -3.0).unwrap();
        assert!(a >= -3.0 && b < -3.0);
    }
}
