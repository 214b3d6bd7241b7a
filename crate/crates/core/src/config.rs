use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{normal_quantile, t_quantile};

/// Settings shared by the known- and unknown-variance solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// Sample size.
    pub n: usize,
    /// Miscoverage level; the intervals have confidence `1 - alpha`.
    pub alpha: f64,
    /// Weight on the uniform part of the mixed weight function.
    pub w: f64,
    /// Half-width of the region where the spline `b` is free.
    pub q: f64,
    /// Spacing of the spline knots on `[-q, q]`.
    pub knot_step: f64,
    /// θ grid covers `[-theta_grid_max, theta_grid_max]`.
    pub theta_grid_max: f64,
    pub theta_grid_step: f64,
    /// Points per Gauss–Legendre panel.
    pub quadrature_order: usize,
    /// Bracket width at which endpoint bisections stop.
    pub tol_root: f64,
    /// Allowed coverage error when solving for critical constants.
    pub tol_coverage: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            n: 24,
            alpha: 0.05,
            w: 0.1,
            q: 8.0,
            knot_step: 1.0,
            theta_grid_max: 15.0,
            theta_grid_step: 0.01,
            quadrature_order: 10,
            tol_root: 1e-10,
            tol_coverage: 1e-8,
        }
    }
}

impl ProblemConfig {
    pub fn with_w(mut self, w: f64) -> Self {
        self.w = w;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_grid(mut self, max: f64, step: f64) -> Self {
        self.theta_grid_max = max;
        self.theta_grid_step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return bad(format!("w must be a finite nonnegative number, got {}", self.w));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return bad(format!("q must be positive, got {}", self.q));
        }
        if !(self.knot_step > 0.0) {
            return bad(format!("knot step must be positive, got {}", self.knot_step));
        }
        let pieces = 2.0 * self.q / self.knot_step;
        if (pieces - pieces.round()).abs() > 1e-9 || pieces.round() < 2.0 {
            return bad(format!(
                "knot step {} must divide 2q = {} into at least two pieces",
                self.knot_step,
                2.0 * self.q
            ));
        }
        if !(self.theta_grid_step > 0.0 && self.theta_grid_max > 0.0) {
            return bad("theta grid extent and step must be positive".into());
        }
        if self.quadrature_order == 0 {
            return bad("quadrature order must be positive".into());
        }
        if !(self.tol_root > 0.0 && self.tol_coverage > 0.0) {
            return bad("tolerances must be positive".into());
        }
        let reach = self.q + self.z_half_alpha();
        if self.theta_grid_max < reach {
            return bad(format!(
                "theta grid max {} must be at least q + z_(alpha/2) = {reach}",
                self.theta_grid_max
            ));
        }
        Ok(())
    }

    /// `z_{α/2}`, the two-sided normal critical value.
    pub fn z_half_alpha(&self) -> f64 {
        normal_quantile(0.5 * self.alpha).expect("alpha validated")
    }

    /// `z_α`, the one-sided normal critical value used by Pratt's interval.
    pub fn z_alpha(&self) -> f64 {
        normal_quantile(self.alpha).expect("alpha validated")
    }

    /// `t_{α/2, n−1}`.
    pub fn t_half_alpha(&self) -> f64 {
        t_quantile(0.5 * self.alpha, (self.n - 1) as u64).expect("alpha and n validated")
    }

    /// Number of grid points on each side of zero.
    pub fn half_grid_len(&self) -> usize {
        (self.theta_grid_max / self.theta_grid_step + 1e-9).floor() as usize
    }

    /// Symmetric θ grid `k·step` for `|k| ≤ half_grid_len`, ascending.
    pub fn theta_grid(&self) -> Vec<f64> {
        let m = self.half_grid_len() as i64;
        (-m..=m).map(|k| k as f64 * self.theta_grid_step).collect()
    }

    /// Nonnegative half of the θ grid, ascending from 0.
    pub fn theta_half_grid(&self) -> Vec<f64> {
        (0..=self.half_grid_len())
            .map(|k| k as f64 * self.theta_grid_step)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ProblemConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let base = ProblemConfig::default();
        assert!(base.clone().with_alpha(0.0).validate().is_err());
        assert!(base.clone().with_alpha(1.0).validate().is_err());
        assert!(base.clone().with_w(-0.1).validate().is_err());
        assert!(base.clone().with_n(1).validate().is_err());
        assert!(ProblemConfig { q: -1.0, ..base.clone() }.validate().is_err());
        assert!(ProblemConfig { knot_step: 0.75, ..base.clone() }.validate().is_err());
        assert!(ProblemConfig { tol_root: 0.0, ..base.clone() }.validate().is_err());
        // grid must reach q + z_{α/2}
        assert!(base.clone().with_grid(9.0, 0.01).validate().is_err());
        assert!(base.with_grid(10.0, 0.01).validate().is_ok());
    }

    #[test]
    fn grid_is_symmetric() {
        let cfg = ProblemConfig::default().with_grid(10.0, 0.25);
        let g = cfg.theta_grid();
        assert_eq!(g.len(), 81);
        for (a, b) in g.iter().zip(g.iter().rev()) {
            assert_eq!(*a, -*b);
        }
        assert_eq!(cfg.theta_half_grid().len(), 41);
    }
}
