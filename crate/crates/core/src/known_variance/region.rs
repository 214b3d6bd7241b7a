//! Acceptance regions of the mixed interval for X ~ N(θ, 1).
//!
//! The region for θ is the sublevel set `B(c, θ) = {x : g(x, c, θ) < 0}` of
//!
//! ```text
//! g(x, c, θ) = (w + φ(x)) / φ(x − θ) − c
//! ```
//!
//! with `c = c_α(θ)` chosen so that `P_θ(X ∈ B) = 1 − α`. For `w > 0`, `∂g/∂x`
//! is increasing in `x` and `g → ∞` as `|x| → ∞`, so `B` is empty or a
//! bounded interval. All root finding below works on
//! `G(x) = ln((w + φ(x)) / φ(x − θ))`, which has the same sublevel sets and
//! never overflows.

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::roots::{bisect, expand_until};
use crate::special::{normal_cdf, normal_pdf, LN_SQRT_2PI};

/// `g(x, c, θ) = (w + φ(x)) / φ(x − θ) − c`.
pub fn g_value(x: f64, c: f64, theta: f64, w: f64) -> f64 {
    (w + normal_pdf(x)) / normal_pdf(x - theta) - c
}

/// Bounds on `c_α(θ)` valid for every θ when `w > 0`:
/// `w√(2π)·e^{z²/2} ≤ c_α(θ) ≤ (w√(2π) + 1)·e^{z²/2}`, `z = z_{α/2}`.
pub fn critical_constant_bounds(w: f64, z_half_alpha: f64) -> (f64, f64) {
    let ws = w * (2.0 * std::f64::consts::PI).sqrt();
    let e = (0.5 * z_half_alpha * z_half_alpha).exp();
    (ws * e, (ws + 1.0) * e)
}

/// `ln((w + φ(x)) / φ(x − θ))` and its minimiser for fixed `(θ, w)`.
#[derive(Debug, Clone, Copy)]
struct LogRatio {
    theta: f64,
    w: f64,
    argmin: f64,
    min: f64,
}

impl LogRatio {
    fn new(theta: f64, w: f64, tol: f64) -> Result<Self> {
        let partial = |x: f64| {
            let p = normal_pdf(x);
            (x - theta) - x * p / (w + p)
        };
        let (_, lo) = expand_until(theta, -1.0, 1.0, |x| partial(x) < 0.0)?;
        let (_, hi) = expand_until(theta, 1.0, 1.0, |x| partial(x) > 0.0)?;
        let argmin = bisect(partial, lo, hi, tol)?;
        let mut this = Self { theta, w, argmin, min: 0.0 };
        this.min = this.eval(argmin);
        Ok(this)
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let d = x - self.theta;
        (self.w + normal_pdf(x)).ln() + 0.5 * d * d + LN_SQRT_2PI
    }

    /// `{x : G(x) < level}` as an interval, or `None` when empty.
    fn sublevel(&self, level: f64, tol: f64) -> Result<Option<Interval>> {
        if self.min >= level {
            return Ok(None);
        }
        let f = |x: f64| self.eval(x) - level;
        let (a, b) = expand_until(self.argmin, -1.0, 0.5, |x| f(x) >= 0.0)?;
        let lower = bisect(f, b, a, tol)?;
        let (a, b) = expand_until(self.argmin, 1.0, 0.5, |x| f(x) >= 0.0)?;
        let upper = bisect(f, a, b, tol)?;
        Ok(Some(Interval::new(lower, upper)))
    }
}

/// `B(c, θ) = {x : g(x, c, θ) < 0}` for `w > 0`, `c > 0`; `None` if empty.
pub fn sublevel_interval(c: f64, theta: f64, w: f64, tol: f64) -> Result<Option<Interval>> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("sublevel sets need w > 0, got {w}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("sublevel sets need c > 0, got {c}")));
    }
    LogRatio::new(theta, w, tol)?.sublevel(c.ln(), tol)
}

/// Acceptance region `[lower, upper]` for one θ together with `c_α(θ)`.
///
/// `c` is `None` for the closed-form standard and Pratt families, whose
/// regions are not built from a critical constant. Pratt regions are
/// unbounded on one side for θ ≠ 0 and equal to the whole line at θ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRegion {
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    pub c: Option<f64>,
}

impl AcceptanceRegion {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// `P_θ(X ∈ [lower, upper])`.
    pub fn coverage(&self) -> f64 {
        normal_cdf(self.upper - self.theta) - normal_cdf(self.lower - self.theta)
    }
}

/// Solve for `c_α(θ)` by bisection on `ln c` over the bracket from
/// [`critical_constant_bounds`]. Coverage of `B(c, θ)` is nondecreasing in `c`.
pub fn acceptance_region(theta: f64, config: &ProblemConfig) -> Result<AcceptanceRegion> {
    let w = config.w;
    if !(w > 0.0) {
        return Err(Error::Domain(format!(
            "the mixed acceptance region needs w > 0, got {w}"
        )));
    }
    let target = 1.0 - config.alpha;
    let tol = config.tol_coverage;
    let ratio = LogRatio::new(theta, w, config.tol_root)?;
    let solve = |level: f64| -> Result<(f64, Option<Interval>)> {
        let set = ratio.sublevel(level, config.tol_root)?;
        let cov = set.map_or(0.0, |b| {
            normal_cdf(b.upper - theta) - normal_cdf(b.lower - theta)
        });
        Ok((cov - target, set))
    };
    let finish = |level: f64, set: Option<Interval>| -> Result<AcceptanceRegion> {
        let b = set.ok_or_else(|| {
            Error::Convergence(format!("empty acceptance set at theta = {theta}"))
        })?;
        Ok(AcceptanceRegion { theta, lower: b.lower, upper: b.upper, c: Some(level.exp()) })
    };

    let (c_lo, c_hi) = critical_constant_bounds(w, config.z_half_alpha());
    let (mut lo, mut hi) = (c_lo.ln(), c_hi.ln());
    let (f_lo, set_lo) = solve(lo)?;
    if f_lo.abs() <= tol {
        return finish(lo, set_lo);
    }
    let (f_hi, set_hi) = solve(hi)?;
    if f_hi.abs() <= tol {
        return finish(hi, set_hi);
    }
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Convergence(format!(
            "critical constant bracket does not straddle 1 - alpha at theta = {theta} \
             (coverage error {f_lo:e} .. {f_hi:e})"
        )));
    }
    // Bisect to a tight bracket rather than stopping at the coverage tolerance
    // so that regions at θ and −θ agree to the root tolerance.
    let mut best: Option<(f64, f64, Option<Interval>)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let (f, set) = solve(mid)?;
        if best.as_ref().is_none_or(|b| f.abs() < b.0.abs()) {
            best = Some((f, mid, set));
        }
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    if let Some((f, level, set)) = best {
        if f.abs() <= tol {
            return finish(level, set);
        }
    }
    Err(Error::Convergence(format!(
        "coverage tolerance {tol:e} not met at theta = {theta}; tolerance too tight for the root tolerance?"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(w: f64) -> ProblemConfig {
        ProblemConfig::default().with_w(w)
    }

    #[test]
    fn g_value_closed_forms() {
        assert_abs_diff_eq!(g_value(0.0, 0.0, 0.0, 0.0), 1.0, epsilon = 1e-15);
        let expected = 1.0 + 0.1 * (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(g_value(0.0, 0.0, 0.0, 0.1), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 1.25066, epsilon = 1e-5);
        assert!(g_value(20.0, 3.0, 0.0, 0.1) > 1e6);
        assert!(g_value(-20.0, 3.0, 0.0, 0.1) > 1e6);
    }

    #[test]
    fn g_derivative_increasing() {
        // finite-difference slopes of g increase in x
        for &theta in &[-3.0, 0.0, 0.7, 4.0] {
            let h = 1e-4;
            let slope = |x: f64| (g_value(x + h, 1.0, theta, 0.1) - g_value(x - h, 1.0, theta, 0.1)) / (2.0 * h);
            let xs: Vec<f64> = (-40..=40).map(|k| theta + k as f64 * 0.1).collect();
            for p in xs.windows(2) {
                assert!(slope(p[1]) > slope(p[0]), "theta {theta} at {}", p[0]);
            }
        }
    }

    #[test]
    fn empty_below_infimum() {
        assert!(sublevel_interval(1e-3, 0.5, 0.1, 1e-12).unwrap().is_none());
        assert!(sublevel_interval(1.0, 0.5, 0.0, 1e-12).is_err());
    }

    #[test]
    fn endpoints_are_roots() {
        let (theta, w, c) = (0.8, 0.1, 3.0);
        let b = sublevel_interval(c, theta, w, 1e-12).unwrap().unwrap();
        for e in [b.lower, b.upper] {
            assert!(g_value(e, c, theta, w).abs() <= 1e-9 * c);
        }
        assert!(g_value(b.midpoint(), c, theta, w) < 0.0);
    }

    #[test]
    fn bracket_at_zero() {
        let (lo, hi) = critical_constant_bounds(0.1, 1.959_963_984_540_054);
        assert_abs_diff_eq!(lo, 1.711_008, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 8.536_944, epsilon = 1e-6);
    }

    #[test]
    fn region_at_zero_matches_sublevel_cross_check() {
        let config = cfg(0.1);
        let region = acceptance_region(0.0, &config).unwrap();
        let c = region.c.unwrap();
        let (lo, hi) = critical_constant_bounds(0.1, config.z_half_alpha());
        assert!(lo <= c && c <= hi);
        assert_abs_diff_eq!(region.coverage(), 0.95, epsilon = 1e-8);
        let b = sublevel_interval(c, 0.0, 0.1, 1e-12).unwrap().unwrap();
        let cov = normal_cdf(b.upper) - normal_cdf(b.lower);
        assert_abs_diff_eq!(cov, 0.95, epsilon = 1e-8);
    }

    #[test]
    fn region_far_out_is_nearly_standard() {
        let config = cfg(0.1);
        let z = config.z_half_alpha();
        let r = acceptance_region(5.0, &config).unwrap();
        assert!((r.lower - (5.0 - z)).abs() < 0.02);
        assert!((r.upper - (5.0 + z)).abs() < 0.02);
        let r = acceptance_region(12.0, &config).unwrap();
        assert!((r.lower - (12.0 - z)).abs() < 1e-6);
        assert!((r.upper - (12.0 + z)).abs() < 1e-6);
    }

    #[test]
    fn reflection_symmetry() {
        let config = cfg(0.1);
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            let a = acceptance_region(t, &config).unwrap();
            let b = acceptance_region(-t, &config).unwrap();
            assert_abs_diff_eq!(a.lower, -b.upper, epsilon = 1e-9);
            assert_abs_diff_eq!(a.upper, -b.lower, epsilon = 1e-9);
        }
    }

    #[test]
    fn requires_positive_weight() {
        assert!(acceptance_region(0.0, &cfg(0.0)).is_err());
    }
}
