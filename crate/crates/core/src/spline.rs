//! The endpoint function `b` of the unknown-variance interval.
//!
//! Inside `[-q, q]`, `b` is the clamped cubic spline through equally spaced
//! knots with end slopes fixed at 1; outside it is `y + t`, with
//! `t = t_{α/2, n−1}`. The end values `±q + t` make the two pieces join with
//! a continuous first derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of evenly spaced points at which shape constraints are checked.
pub const SHAPE_SAMPLES: usize = 10_000;

/// Clamped cubic spline on an equally spaced grid `x0 + k h`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedCubic {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl ClampedCubic {
    /// Solves the tridiagonal system for the knot second derivatives.
    pub fn new(x0: f64, h: f64, values: Vec<f64>, slope_left: f64, slope_right: f64) -> Self {
        let n = values.len();
        assert!(n >= 2, "a spline needs at least two knots");
        let y = &values;
        let mut rhs = vec![0.0; n];
        let mut diag = vec![4.0; n];
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - slope_left);
        diag[0] = 2.0;
        rhs[n - 1] = 6.0 / h * (slope_right - (y[n - 1] - y[n - 2]) / h);
        diag[n - 1] = 2.0;
        for i in 1..n - 1 {
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        // Thomas algorithm; all off-diagonals are 1
        for i in 1..n {
            let m = 1.0 / diag[i - 1];
            diag[i] -= m;
            rhs[i] -= m * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - second[i + 1]) / diag[i];
        }
        Self { x0, h, values, second }
    }

    pub fn knot(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn piece(&self, x: f64) -> (usize, f64) {
        let last = self.values.len() - 2;
        let k = ((x - self.x0) / self.h).floor();
        let i = if k < 0.0 { 0 } else { (k as usize).min(last) };
        (i, (x - self.knot(i)) / self.h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.piece(x);
        self.eval_piece(i, t)
    }

    #[inline]
    fn eval_piece(&self, i: usize, t: f64) -> f64 {
        let a = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        a * self.values[i]
            + t * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (t * t * t - t) * self.second[i + 1]) * h2
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, t) = self.piece(x);
        let a = 1.0 - t;
        (self.values[i + 1] - self.values[i]) / self.h
            - (3.0 * a * a - 1.0) / 6.0 * self.h * self.second[i]
            + (3.0 * t * t - 1.0) / 6.0 * self.h * self.second[i + 1]
    }

    /// `x` in `[knot(i), knot(i+1)]` with `eval(x) = v`, for an increasing piece
    /// whose end values bracket `v`.
    fn solve_in_piece(&self, i: usize, v: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if self.eval_piece(i, mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.knot(i) + 0.5 * (lo + hi) * self.h
    }
}

/// Strictly increasing `b : ℝ → ℝ`, a clamped cubic on `[-q, q]` and
/// `y + t_quant` outside.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubicB {
    q: f64,
    t_quant: f64,
    spline: ClampedCubic,
}

impl MonotoneCubicB {
    /// Build from the values at the equally spaced knots `-q, …, q` and
    /// check the shape constraints.
    pub fn build(knot_values: &[f64], q: f64, t_quant: f64) -> Result<Self> {
        let b = Self::build_unchecked(knot_values, q, t_quant)?;
        b.check_shape()?;
        Ok(b)
    }

    /// Build without the monotonicity and symmetry checks. End values are
    /// still verified.
    pub fn build_unchecked(knot_values: &[f64], q: f64, t_quant: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::Construction(format!("q must be positive, got {q}")));
        }
        if knot_values.len() < 3 {
            return Err(Error::Construction(format!(
                "need at least three knots, got {}",
                knot_values.len()
            )));
        }
        if knot_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Construction("knot values must be finite".into()));
        }
        let first = knot_values[0];
        let last = knot_values[knot_values.len() - 1];
        let tol = 1e-9 * (1.0 + q + t_quant.abs());
        if (first - (-q + t_quant)).abs() > tol || (last - (q + t_quant)).abs() > tol {
            return Err(Error::Construction(format!(
                "end values must be -q + t = {} and q + t = {}, got {first} and {last}",
                -q + t_quant,
                q + t_quant
            )));
        }
        let h = 2.0 * q / (knot_values.len() - 1) as f64;
        let spline = ClampedCubic::new(-q, h, knot_values.to_vec(), 1.0, 1.0);
        Ok(Self { q, t_quant, spline })
    }

    /// `b(y) = y + t_quant` everywhere.
    pub fn standard(q: f64, t_quant: f64, knot_count: usize) -> Result<Self> {
        let h = 2.0 * q / (knot_count - 1) as f64;
        let values: Vec<f64> = (0..knot_count).map(|i| -q + i as f64 * h + t_quant).collect();
        Self::build(&values, q, t_quant)
    }

    /// Strict monotonicity and `b(y) + b(−y) ≥ 0`, checked on a dense grid.
    pub fn check_shape(&self) -> Result<()> {
        let step = 2.0 * self.q / (SHAPE_SAMPLES - 1) as f64;
        for k in 0..SHAPE_SAMPLES {
            let y = -self.q + k as f64 * step;
            let d = self.spline.derivative(y);
            if !(d > 0.0) {
                return Err(Error::InvalidShape {
                    y,
                    reason: format!("b'(y) = {d} is not positive"),
                });
            }
            if y >= 0.0 {
                let s = self.eval(y) + self.eval(-y);
                if s < -1e-12 {
                    return Err(Error::InvalidShape {
                        y,
                        reason: format!("b(y) + b(-y) = {s} is negative"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn t_quant(&self) -> f64 {
        self.t_quant
    }

    pub fn knot_count(&self) -> usize {
        self.spline.values().len()
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.knot_count()).map(|i| self.spline.knot(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y.abs() >= self.q {
            y + self.t_quant
        } else {
            self.spline.eval(y)
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        if y.abs() >= self.q {
            1.0
        } else {
            self.spline.derivative(y)
        }
    }

    /// `b⁻¹(v)`. Closed form on the linear extension, bisection inside.
    pub fn inverse(&self, v: f64) -> f64 {
        let lo = -self.q + self.t_quant;
        let hi = self.q + self.t_quant;
        if v <= lo || v >= hi {
            return v - self.t_quant;
        }
        let values = self.spline.values();
        // values are increasing, so the piece is found by binary search
        let i = values.partition_point(|&k| k <= v).saturating_sub(1);
        let i = i.min(values.len() - 2);
        self.spline.solve_in_piece(i, v)
    }

    /// `b(y) − (y + t_quant)` is zero for the standard interval.
    pub fn deviation(&self, y: f64) -> f64 {
        self.eval(y) - y - self.t_quant
    }
}

/// On-disk form of an optimized `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFile {
    pub q: f64,
    pub t_quant: f64,
    pub n: usize,
    pub alpha: f64,
    pub w: f64,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl SplineFile {
    pub fn from_spline(b: &MonotoneCubicB, n: usize, alpha: f64, w: f64) -> Self {
        Self {
            q: b.q(),
            t_quant: b.t_quant(),
            n,
            alpha,
            w,
            knots: b.knots(),
            values: b.values().to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline. Reading and re-emitting is byte-identical.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// Rebuild `b`, checking the stored knots, the t quantile, and the shape.
    pub fn to_spline(&self) -> Result<MonotoneCubicB> {
        if self.knots.len() != self.values.len() {
            return Err(Error::Construction(format!(
                "{} knots but {} values",
                self.knots.len(),
                self.values.len()
            )));
        }
        if self.n < 2 || !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Construction(format!(
                "invalid n = {} or alpha = {}",
                self.n, self.alpha
            )));
        }
        let t = crate::special::t_quantile(0.5 * self.alpha, (self.n - 1) as u64)?;
        if (t - self.t_quant).abs() > 1e-8 {
            return Err(Error::Construction(format!(
                "t_quant {} does not match t_(alpha/2, n-1) = {t}",
                self.t_quant
            )));
        }
        let b = MonotoneCubicB::build(&self.values, self.q, self.t_quant)?;
        for (i, (&stored, expected)) in self.knots.iter().zip(b.knots()).enumerate() {
            if (stored - expected).abs() > 1e-9 * (1.0 + self.q) {
                return Err(Error::Construction(format!(
                    "knot {i} is {stored}, expected {expected} for equal spacing on [-q, q]"
                )));
            }
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const T: f64 = 2.068_657_610_419_041;

    fn wiggly() -> MonotoneCubicB {
        let knots: Vec<f64> = (-8..=8).map(|k| k as f64).collect();
        let bumps = [
            0.0, 0.03, 0.2, 0.5, 0.52, 0.28, -0.02, -0.22, -0.27, -0.22, -0.11, -0.01, 0.0, 0.0,
            0.0, 0.0, 0.0,
        ];
        let values: Vec<f64> = knots.iter().zip(bumps).map(|(y, d)| y + T + d).collect();
        MonotoneCubicB::build(&values, 8.0, T).unwrap()
    }

    #[test]
    fn reproduces_linear_data() {
        let b = MonotoneCubicB::standard(8.0, T, 17).unwrap();
        for k in -1600..=1600 {
            let y = k as f64 * 0.01;
            assert_abs_diff_eq!(b.eval(y), y + T, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(b.eval(0.0) + b.eval(-0.0) - 0.0, 2.0 * T, epsilon = 1e-12);
    }

    #[test]
    fn reproduces_cubic_data_with_matching_slopes() {
        // y³ on [-2, 2] with clamped slopes 12 is reproduced exactly
        let values: Vec<f64> = (0..9).map(|i| (-2.0 + 0.5 * i as f64).powi(3)).collect();
        let s = ClampedCubic::new(-2.0, 0.5, values, 12.0, 12.0);
        for k in 0..=400 {
            let x = -2.0 + k as f64 * 0.01;
            assert_abs_diff_eq!(s.eval(x), x.powi(3), epsilon = 1e-12);
            assert_abs_diff_eq!(s.derivative(x), 3.0 * x * x, epsilon = 1e-11);
        }
    }

    #[test]
    fn boundary_values_and_extension() {
        let b = wiggly();
        assert_abs_diff_eq!(b.eval(8.0), 8.0 + T, epsilon = 1e-14);
        assert_abs_diff_eq!(b.eval(-8.0), -8.0 + T, epsilon = 1e-14);
        assert_abs_diff_eq!(b.eval(13.0), 13.0 + T, epsilon = 1e-14);
        let e = 1e-8;
        assert!((b.eval(8.0 - e) - b.eval(8.0 + e)).abs() < 1e-6);
        assert!((b.eval(-8.0 - e) - b.eval(-8.0 + e)).abs() < 1e-6);
        assert_abs_diff_eq!(b.derivative(8.0 - 1e-9), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(b.derivative(-8.0 + 1e-9), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn interpolates_knots() {
        let b = wiggly();
        for (y, v) in b.knots().iter().zip(b.values()) {
            assert_abs_diff_eq!(b.eval(*y), *v, epsilon = 1e-14);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let b = wiggly();
        for k in 0..1000 {
            let y = -16.0 + 32.0 * k as f64 / 999.0;
            assert_abs_diff_eq!(b.inverse(b.eval(y)), y, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(b.inverse(1e6), 1e6 - T, epsilon = 1e-9);
        let s = MonotoneCubicB::standard(8.0, T, 17).unwrap();
        for &v in &[-20.0, -3.0, 0.0, 1.7, 9.9, 40.0] {
            assert_abs_diff_eq!(s.inverse(v), v - T, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_non_monotone() {
        let mut values: Vec<f64> = (-8..=8).map(|k| k as f64 + T).collect();
        values[8] = values[7] - 0.5;
        match MonotoneCubicB::build(&values, 8.0, T) {
            Err(Error::InvalidShape { y, .. }) => assert!(y > -2.0 && y < 2.0),
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_lower_above_upper() {
        // a smooth dip pushes b(0) below zero while keeping b increasing
        let values: Vec<f64> = (-8..=8)
            .map(|k: i32| {
                let y = k as f64;
                let dip = if k.abs() == 8 { 0.0 } else { -2.5 * (-y * y / 8.0).exp() };
                y + T + dip
            })
            .collect();
        match MonotoneCubicB::build(&values, 8.0, T) {
            Err(Error::InvalidShape { reason, .. }) => assert!(reason.contains("b(-y)"), "{reason}"),
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_end_values() {
        let mut values: Vec<f64> = (-8..=8).map(|k| k as f64 + T).collect();
        values[16] += 0.1;
        assert!(matches!(
            MonotoneCubicB::build(&values, 8.0, T),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let file = SplineFile::from_spline(&wiggly(), 24, 0.05, 0.1);
        let text = file.to_json();
        let again = SplineFile::from_json(&text).unwrap();
        assert_eq!(again.to_json(), text);
        let b = again.to_spline().unwrap();
        assert_eq!(b, wiggly());
    }

    #[test]
    fn json_rejects_mismatched_t() {
        let mut file = SplineFile::from_spline(&wiggly(), 24, 0.05, 0.1);
        file.n = 30;
        assert!(file.to_spline().is_err());
    }
}
