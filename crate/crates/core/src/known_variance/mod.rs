//! Intervals for θ from a single observation X ~ N(θ, 1).
//!
//! A known-variance normal sample reduces to this case through
//! `X = X̄ / (σ/√n)` and `θ = √n μ / σ`; the μ-scale interval is the θ-scale
//! one multiplied by `σ/√n`.

mod family;
mod region;

use serde::{Deserialize, Serialize};

pub use family::{AcceptanceFamily, ConfidenceSet, EfficiencyCurve};
pub use region::{
    acceptance_region, critical_constant_bounds, g_value, sublevel_interval, AcceptanceRegion,
};

use crate::interval::Interval;
use crate::special::normal_quantile;

/// Which acceptance-region family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// `[x − z_{α/2}, x + z_{α/2}]`.
    Standard,
    /// Shortest expected length at θ = 0 (mixed weight with `w = 0`).
    Pratt,
    /// Minimum average expected length under the weight `ν(x) = w x + H(x)`.
    Mixed,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Self::Standard),
            "pratt" => Ok(Self::Pratt),
            "mixed" => Ok(Self::Mixed),
            other => Err(format!("unknown method {other:?} (standard, pratt, mixed)")),
        }
    }
}

/// `[x − z_{α/2}, x + z_{α/2}]`.
pub fn standard_interval(x: f64, alpha: f64) -> Interval {
    let z = normal_quantile(0.5 * alpha).expect("0 < alpha < 1");
    Interval::new(x - z, x + z)
}

/// `[min(0, x − z_α), max(0, x + z_α)]`. Note the one-sided quantile.
pub fn pratt_interval(x: f64, alpha: f64) -> Interval {
    let z = normal_quantile(alpha).expect("0 < alpha < 1");
    Interval::new((x - z).min(0.0), (x + z).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standard_values() {
        let i = standard_interval(0.0, 0.05);
        assert_abs_diff_eq!(i.lower, -1.959_96, epsilon = 1e-5);
        assert_abs_diff_eq!(i.upper, 1.959_96, epsilon = 1e-5);
        let i = standard_interval(3.0, 0.05);
        assert_abs_diff_eq!(i.lower, 1.040_04, epsilon = 1e-5);
        assert_abs_diff_eq!(i.upper, 4.959_96, epsilon = 1e-5);
        for &x in &[-7.0, 0.3, 12.0] {
            let z = normal_quantile(0.025).unwrap();
            assert_abs_diff_eq!(standard_interval(x, 0.05).length(), 2.0 * z, epsilon = 1e-12);
        }
    }

    #[test]
    fn pratt_values() {
        let i = pratt_interval(0.0, 0.05);
        assert_abs_diff_eq!(i.lower, -1.644_85, epsilon = 1e-5);
        assert_abs_diff_eq!(i.upper, 1.644_85, epsilon = 1e-5);
        let i = pratt_interval(10.0, 0.05);
        assert_eq!(i.lower, 0.0);
        assert_abs_diff_eq!(i.upper, 11.644_85, epsilon = 1e-5);
        let i = pratt_interval(-10.0, 0.05);
        assert_abs_diff_eq!(i.lower, -11.644_85, epsilon = 1e-5);
        assert_eq!(i.upper, 0.0);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("mixed".parse::<Method>().unwrap(), Method::Mixed);
        assert!("other".parse::<Method>().is_err());
    }

    #[test]
    fn pratt_efficiency_at_zero() {
        let cfg = ProblemConfig::default().with_w(0.0);
        let fam = AcceptanceFamily::for_weight(&cfg).unwrap();
        assert_eq!(fam.method, Method::Pratt);
        assert_abs_diff_eq!(fam.efficiency(0.0), 0.7223, epsilon = 1e-4);
    }

    #[test]
    fn standard_family_has_unit_efficiency() {
        let cfg = ProblemConfig::default();
        let fam = AcceptanceFamily::build(&cfg, Method::Standard).unwrap();
        for &t in &[0.0, 2.0, -9.0] {
            assert_abs_diff_eq!(fam.expected_length(t), 2.0 * cfg.z_half_alpha(), epsilon = 1e-15);
            assert_abs_diff_eq!(fam.efficiency(t), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mixed_family_needs_weight() {
        let cfg = ProblemConfig::default().with_w(0.0);
        assert!(AcceptanceFamily::build(&cfg, Method::Mixed).is_err());
    }
}
