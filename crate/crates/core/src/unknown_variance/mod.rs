//! The interval
//!
//! ```text
//! G = [ −(S/√n) b(−X̄/(S/√n)),  (S/√n) b(X̄/(S/√n)) ]
//! ```
//!
//! for a normal mean with unknown variance: its coverage probability, scaled
//! expected length, the weighted length criterion, and the search for the
//! spline `b` that minimizes the criterion subject to coverage `≥ 1 − α`.
//!
//! Coverage and scaled expected length depend on `(μ, σ)` only through
//! `θ = √n μ / σ` and are even functions of θ.

mod optimize;
mod sqp;

pub use optimize::{knot_count, optimize_b, optimize_b_with, OptimizationResult, OptimizerSettings};
pub use sqp::{LinearRow, Problem as SqpProblem, SqpOutcome, SqpSettings};

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::par;
use crate::quadrature::{gauss_legendre, Rule};
use crate::special::{mean_r, normal_cdf, normal_pdf, r_density, r_support, t_quantile};
use crate::spline::MonotoneCubicB;

/// Mass of `R` allowed outside the r-integration range on each side.
pub const R_TAIL_MASS: f64 = 1e-12;

/// Default number of Gauss–Legendre panels for integrals over r.
pub const R_PANELS: usize = 40;

/// Quadrature in `r` against the density of `R = S/σ`, plus the base rule
/// used for integrals in `y` over the spline pieces.
#[derive(Debug, Clone)]
pub struct Evaluator {
    n: usize,
    mean_r: f64,
    r_nodes: Vec<f64>,
    /// quadrature weight times `f_R(r)`
    r_weights: Vec<f64>,
    base: (Vec<f64>, Vec<f64>),
}

impl Evaluator {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        Self::with_panels(n, R_PANELS, order)
    }

    pub fn with_panels(n: usize, panels: usize, order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        if order == 0 || panels == 0 {
            return Err(Error::Domain("quadrature needs a positive order and panel count".into()));
        }
        let (lo, hi) = r_support(n, R_TAIL_MASS);
        let rule = Rule::composite(lo, hi, panels, order);
        let r_weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * r_density(r, n))
            .collect();
        Ok(Self {
            n,
            mean_r: mean_r(n),
            r_nodes: rule.nodes,
            r_weights,
            base: gauss_legendre(order),
        })
    }

    pub fn for_config(config: &ProblemConfig) -> Result<Self> {
        Self::new(config.n, config.quadrature_order)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean_r(&self) -> f64 {
        self.mean_r
    }

    /// `(r, weight · f_R(r))` pairs.
    pub(crate) fn r_rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r_nodes.iter().copied().zip(self.r_weights.iter().copied())
    }

    /// Gauss–Legendre rule on `[0, q]` with one panel per spline piece.
    pub(crate) fn half_y_rule(&self, b: &MonotoneCubicB) -> Rule {
        let pieces = b.knot_count() - 1;
        let h = 2.0 * b.q() / pieces as f64;
        // knots inside [0, q]; add 0 when it falls mid-piece
        let mut breaks: Vec<f64> = (0..=pieces)
            .map(|k| -b.q() + k as f64 * h)
            .filter(|&y| y > 1e-12)
            .collect();
        breaks.insert(0, 0.0);
        let (x, w) = &self.base;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breaks.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[1] + pair[0]);
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Rule { nodes, weights }
    }

    /// `P(μ ∈ G)` as a function of θ:
    /// `∫ [Φ(−r b⁻¹(−θ/r) − θ) − Φ(r b⁻¹(θ/r) − θ)] f_R(r) dr`.
    pub fn coverage(&self, theta: f64, b: &MonotoneCubicB) -> f64 {
        self.r_rule()
            .map(|(r, wf)| {
                let upper = -r * b.inverse(-theta / r) - theta;
                let lower = r * b.inverse(theta / r) - theta;
                wf * (normal_cdf(upper) - normal_cdf(lower))
            })
            .sum()
    }

    /// `(√n/σ) E L(G)`, written as `2 t E(R)` plus
    /// `∫∫ D(y) φ(ry − θ) r² f_R(r) dy dr` with `D(y) = b(y) + b(−y) − 2t`,
    /// which vanishes for `|y| ≥ q`.
    pub fn scaled_expected_length(&self, theta: f64, b: &MonotoneCubicB) -> f64 {
        let t = b.t_quant();
        let y_rule = self.half_y_rule(b);
        let dev: Vec<f64> = y_rule
            .nodes
            .iter()
            .zip(&y_rule.weights)
            .map(|(&y, &w)| w * (b.eval(y) + b.eval(-y) - 2.0 * t))
            .collect();
        let excess: f64 = self
            .r_rule()
            .map(|(r, wf)| {
                let inner: f64 = y_rule
                    .nodes
                    .iter()
                    .zip(&dev)
                    .map(|(&y, &d)| d * (normal_pdf(r * y - theta) + normal_pdf(r * y + theta)))
                    .sum();
                wf * r * r * inner
            })
            .sum();
        2.0 * t * self.mean_r + excess
    }

    /// `w + ∫ φ(r y) r² f_R(r) dr` at each node of `y_rule`.
    pub(crate) fn criterion_kernel(&self, y_rule: &Rule, w: f64) -> Vec<f64> {
        y_rule
            .nodes
            .iter()
            .map(|&y| {
                let k: f64 = self
                    .r_rule()
                    .map(|(r, wf)| wf * r * r * (w + normal_pdf(r * y)))
                    .sum();
                k
            })
            .collect()
    }

    /// Weighted length criterion
    /// `∫∫_{−q}^{q} (b(y) + b(−y) − 2t)(w + φ(ry)) dy r² f_R(r) dr`.
    /// Zero for the standard interval; negative values improve on it.
    pub fn objective(&self, b: &MonotoneCubicB, w: f64) -> f64 {
        let t = b.t_quant();
        let y_rule = self.half_y_rule(b);
        let kernel = self.criterion_kernel(&y_rule, w);
        // the integrand is even in y
        2.0 * y_rule
            .nodes
            .iter()
            .zip(&y_rule.weights)
            .zip(&kernel)
            .map(|((&y, &wy), &k)| wy * k * (b.eval(y) + b.eval(-y) - 2.0 * t))
            .sum::<f64>()
    }

    /// `(E L(G) / E L(G_S))²` with `E L(G_S) ∝ 2 t E(R)`.
    pub fn efficiency(&self, theta: f64, b: &MonotoneCubicB, alpha: f64) -> Result<f64> {
        let t = t_quantile(0.5 * alpha, (self.n - 1) as u64)?;
        let ratio = self.scaled_expected_length(theta, b) / (2.0 * t * self.mean_r);
        Ok(ratio * ratio)
    }

    /// Coverage, scaled length, and efficiency on a grid of θ ≥ 0.
    pub fn profile(&self, thetas: &[f64], b: &MonotoneCubicB, alpha: f64) -> Result<Profile> {
        let t = t_quantile(0.5 * alpha, (self.n - 1) as u64)?;
        let standard = 2.0 * t * self.mean_r;
        let rows = par::map(thetas, |&theta| {
            let len = self.scaled_expected_length(theta, b);
            ProfileRow {
                theta,
                coverage: self.coverage(theta, b),
                scaled_length: len,
                efficiency: (len / standard).powi(2),
            }
        });
        Ok(Profile { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub theta: f64,
    pub coverage: f64,
    pub scaled_length: f64,
    pub efficiency: f64,
}

/// Coverage and length of `G` on a grid of θ ≥ 0 (both are even in θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub rows: Vec<ProfileRow>,
}

impl Profile {
    pub fn min_coverage(&self) -> f64 {
        self.rows.iter().map(|r| r.coverage).fold(f64::INFINITY, f64::min)
    }

    pub fn max_efficiency(&self) -> f64 {
        self.rows.iter().map(|r| r.efficiency).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax_efficiency(&self) -> f64 {
        self.rows
            .iter()
            .fold(None::<&ProfileRow>, |best, r| match best {
                Some(b) if b.efficiency >= r.efficiency => Some(b),
                _ => Some(r),
            })
            .map_or(f64::NAN, |r| r.theta)
    }
}

/// Coverage of `G` at θ using the default quadrature.
pub fn coverage(theta: f64, b: &MonotoneCubicB, n: usize) -> Result<f64> {
    Ok(Evaluator::new(n, ProblemConfig::default().quadrature_order)?.coverage(theta, b))
}

/// Scaled expected length of `G` at θ using the default quadrature.
pub fn scaled_expected_length(theta: f64, b: &MonotoneCubicB, n: usize) -> Result<f64> {
    Ok(Evaluator::new(n, ProblemConfig::default().quadrature_order)?
        .scaled_expected_length(theta, b))
}

/// Weighted length criterion for `b` under `config.w`.
pub fn objective(b: &MonotoneCubicB, config: &ProblemConfig) -> Result<f64> {
    Ok(Evaluator::for_config(config)?.objective(b, config.w))
}

/// Efficiency of the standard interval relative to `G` at θ.
pub fn efficiency_unknown(theta: f64, b: &MonotoneCubicB, n: usize, alpha: f64) -> Result<f64> {
    Evaluator::new(n, ProblemConfig::default().quadrature_order)?.efficiency(theta, b, alpha)
}

/// Evaluate `G` on summary statistics `(x̄, s, n)`.
pub fn interval_from_data(xbar: f64, s: f64, n: usize, b: &MonotoneCubicB) -> Result<Interval> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    let scale = s / (n as f64).sqrt();
    let x = xbar / scale;
    let lower = -scale * b.eval(-x);
    let upper = scale * b.eval(x);
    Ok(Interval::new(lower, upper.max(lower)))
}

/// True when `|√n x̄ / s| ≥ q`, where `G` is exactly the standard t interval.
pub fn uses_standard_branch(xbar: f64, s: f64, n: usize, b: &MonotoneCubicB) -> bool {
    ((n as f64).sqrt() * xbar / s).abs() >= b.q()
}

/// `[min(0, x̄ − t_{α,n−1} s/√n), max(0, x̄ + t_{α,n−1} s/√n)]`, the
/// unknown-variance analogue of Pratt's interval. Reference formula only.
pub fn pratt_t_interval(xbar: f64, s: f64, n: usize, alpha: f64) -> Result<Interval> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    let t = t_quantile(alpha, (n - 1) as u64)?;
    let half = t * s / (n as f64).sqrt();
    Ok(Interval::new((xbar - half).min(0.0), (xbar + half).max(0.0)))
}
