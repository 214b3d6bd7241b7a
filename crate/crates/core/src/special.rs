//! Scalar special functions: the standard normal, Student's t, and the
//! density of the scaled sample standard deviation `R = S / sigma`.
//!
//! Everything here is self-contained. Quantiles are found by bracketing
//! bisection so that their accuracy depends only on the accuracy of the
//! corresponding distribution function.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use crate::error::{Error, Result};

/// 1/√(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// ln √(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const MAX_CF_ITER: usize = 10_000;

/// Series below, continued fraction above.
const ERF_SWITCH: f64 = 2.0;

/// Standard normal density φ(x).
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Complementary error function.
///
/// Uses the positive-term series `erf(z) = 2/√π · e^{-z²} Σ 2ᵏ z^{2k+1} / (2k+1)!!`
/// for `|z| < 2` and the Laplace continued fraction beyond that.
pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z < ERF_SWITCH {
        1.0 - erf_series(z)
    } else {
        erfc_continued_fraction(z)
    }
}

/// Error function.
pub fn erf(z: f64) -> f64 {
    if z.abs() < ERF_SWITCH {
        z.signum() * erf_series(z.abs())
    } else {
        1.0 - erfc(z)
    }
}

fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut k = 0.0;
    loop {
        term *= 2.0 * z2 / (2.0 * k + 3.0);
        sum += term;
        k += 1.0;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-z2).exp() * sum
}

// erfc(z) = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), modified Lentz.
fn erfc_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for k in 1..MAX_CF_ITER {
        let a = k as f64 * 0.5;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (f * PI.sqrt())
}

/// Standard normal distribution function Φ(x).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper-tail normal quantile: returns `z_a` with `P(Z > z_a) = a`.
pub fn normal_quantile(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < a < 1, got {a}"
        )));
    }
    if a == 0.5 {
        return Ok(0.0);
    }
    // Φ(-z) = a, decreasing in z
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if normal_cdf(-mid) > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function I_x(a, b).
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_CF_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized lower and upper incomplete gamma functions `(P(s,x), Q(s,x))`.
pub fn inc_gamma(s: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let ln_front = s * x.ln() - x - ln_gamma(s);
    if x < s + 1.0 {
        let mut ap = s;
        let mut del = 1.0 / s;
        let mut sum = del;
        for _ in 0..MAX_CF_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let p = sum * ln_front.exp();
        (p, 1.0 - p)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_CF_ITER {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = ln_front.exp() * h;
        (1.0 - q, q)
    }
}

/// Upper tail `P(T > t)` of Student's t with `m` degrees of freedom.
pub fn t_sf(t: f64, m: f64) -> f64 {
    let x = m / (m + t * t);
    let two_sided = inc_beta(x, 0.5 * m, 0.5);
    if t >= 0.0 {
        0.5 * two_sided
    } else {
        1.0 - 0.5 * two_sided
    }
}

/// Upper-tail Student t quantile `t_{a,m}` with `P(T > t_{a,m}) = a`.
pub fn t_quantile(a: f64, m: u64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("t quantile needs 0 < a < 1, got {a}")));
    }
    if m == 0 {
        return Err(Error::Domain("t quantile needs at least one degree of freedom".into()));
    }
    if a == 0.5 {
        return Ok(0.0);
    }
    if a > 0.5 {
        return t_quantile(1.0 - a, m).map(|t| -t);
    }
    let m = m as f64;
    let mut hi = 1.0;
    while t_sf(hi, m) > a {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!("t quantile for a = {a} overflows")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if t_sf(mid, m) > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Density of `R = S/σ` for a normal sample of size `n`, i.e. of
/// `√(Q/(n−1))` with `Q ~ χ²_{n−1}`.
pub fn r_density(r: f64, n: usize) -> f64 {
    if r <= 0.0 || n < 2 {
        return 0.0;
    }
    let m = (n - 1) as f64;
    let half = 0.5 * m;
    let ln_f = std::f64::consts::LN_2 + half * half.ln() + (m - 1.0) * r.ln()
        - half * r * r
        - ln_gamma(half);
    ln_f.exp()
}

/// `(P(R ≤ r), P(R > r))`.
pub fn r_cdf(r: f64, n: usize) -> (f64, f64) {
    if r <= 0.0 {
        return (0.0, 1.0);
    }
    let m = (n - 1) as f64;
    inc_gamma(0.5 * m, 0.5 * m * r * r)
}

/// E(R) = √(2/(n−1)) Γ(n/2) / Γ((n−1)/2).
pub fn mean_r(n: usize) -> f64 {
    let m = (n - 1) as f64;
    (2.0 / m).sqrt() * (ln_gamma(0.5 * n as f64) - ln_gamma(0.5 * m)).exp()
}

/// Interval `[lo, hi]` outside of which `R` has at most `tail` mass on each side.
pub fn r_support(n: usize, tail: f64) -> (f64, f64) {
    let lo = bisect_monotone(|r| r_cdf(r, n).0 - tail, 0.0, 1.0);
    let mut hi = 2.0;
    while r_cdf(hi, n).1 > tail {
        hi *= 2.0;
    }
    let hi = bisect_monotone(|r| tail - r_cdf(r, n).1, 0.0, hi);
    (lo, hi)
}

// f increasing with f(lo) ≤ 0 ≤ f(hi)
fn bisect_monotone(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn normal_pdf_values() {
        assert_abs_diff_eq!(normal_pdf(0.0), 0.398_942_280_4, epsilon = 1e-10);
        assert_abs_diff_eq!(normal_pdf(1.0), 0.241_970_724_5, epsilon = 1e-10);
        assert_eq!(normal_pdf(2.3), normal_pdf(-2.3));
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_abs_diff_eq!(normal_cdf(1.959_963_985), 0.975, epsilon = 1e-10);
        assert!(normal_cdf(-8.0) < 1e-15);
        assert!(normal_cdf(-8.0) > 0.0);
        for &x in &[0.1, 0.7, 1.5, 2.9, 3.0, 3.1, 4.5, 7.0] {
            assert_abs_diff_eq!(normal_cdf(-x), 1.0 - normal_cdf(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn erf_branches_agree_at_switch() {
        let below = 1.0 - erf_series(ERF_SWITCH);
        let above = erfc_continued_fraction(ERF_SWITCH);
        assert_relative_eq!(below, above, max_relative = 1e-12);
    }

    #[test]
    fn normal_quantile_values_and_domain() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(normal_quantile(0.025).unwrap(), 1.959_963_985, epsilon = 1e-9);
        assert_abs_diff_eq!(normal_quantile(0.05).unwrap(), 1.644_853_627, epsilon = 1e-9);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &a in &[0.9, 0.5, 0.1, 0.05, 0.025, 0.01, 0.001] {
            let z = normal_quantile(a).unwrap();
            assert_abs_diff_eq!(normal_cdf(z), 1.0 - a, epsilon = 1e-10);
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(0.5), PI.sqrt().ln(), epsilon = 1e-14);
        // Γ(11) = 10!
        assert_abs_diff_eq!(ln_gamma(11.0), 3_628_800f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn t_quantile_values() {
        assert_eq!(t_quantile(0.5, 7).unwrap(), 0.0);
        assert_abs_diff_eq!(t_quantile(0.025, 23).unwrap(), 2.068_658, epsilon = 1e-6);
        let big = t_quantile(0.025, 1_000_000).unwrap();
        assert_abs_diff_eq!(big, 1.959_964, epsilon = 1e-4);
        // Cauchy: t_{0.25,1} = 1
        assert_abs_diff_eq!(t_quantile(0.25, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            t_quantile(0.975, 23).unwrap(),
            -t_quantile(0.025, 23).unwrap(),
            epsilon = 1e-14
        );
        assert!(t_quantile(0.1, 0).is_err());
        assert!(t_quantile(1.5, 3).is_err());
    }

    #[test]
    fn r_density_support_and_mean() {
        assert_eq!(r_density(0.0, 24), 0.0);
        assert_eq!(r_density(-1.0, 24), 0.0);
        assert_abs_diff_eq!(mean_r(2), (2.0 / PI).sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(mean_r(100_000), 1.0, epsilon = 1e-5);
    }

    #[test]
    fn r_support_brackets_tail_mass() {
        let (lo, hi) = r_support(24, 1e-12);
        assert!(lo > 0.0 && lo < 1.0 && hi > 1.0);
        assert_abs_diff_eq!(r_cdf(lo, 24).0, 1e-12, epsilon = 1e-15);
        assert_abs_diff_eq!(r_cdf(hi, 24).1, 1e-12, epsilon = 1e-15);
        // half-normal has positive density at 0
        assert!(r_support(2, 1e-12).0 < 1e-11);
    }
}
