use serde::{Deserialize, Serialize};

use super::region::{acceptance_region, AcceptanceRegion};
use super::{pratt_interval, standard_interval, Method};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::par;
use crate::quadrature::Rule;
use crate::special::{normal_cdf, normal_pdf};

/// Width of the Gauss–Legendre panels used for the expected-length integral.
const LAYER_PANEL_WIDTH: f64 = 0.25;

/// Acceptance regions on a symmetric θ grid, plus the regions at the
/// quadrature nodes used to integrate expected lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceFamily {
    pub method: Method,
    pub config: ProblemConfig,
    pub thetas: Vec<f64>,
    pub regions: Vec<AcceptanceRegion>,
    #[serde(skip)]
    layer: Vec<LayerNode>,
}

#[derive(Debug, Clone, Copy)]
struct LayerNode {
    weight: f64,
    lower: f64,
    upper: f64,
}

/// Result of inverting a family at one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSet {
    /// Smallest interval enclosing every accepted θ.
    pub interval: Interval,
    /// False if the accepted grid points did not form one run.
    pub contiguous: bool,
}

impl AcceptanceFamily {
    pub fn build(config: &ProblemConfig, method: Method) -> Result<Self> {
        config.validate()?;
        if method == Method::Mixed && !(config.w > 0.0) {
            return Err(Error::Config(
                "the mixed family needs w > 0; use the Pratt family for w = 0".into(),
            ));
        }
        let thetas = config.theta_grid();
        let regions = match method {
            Method::Mixed => par::map(&thetas, |&t| acceptance_region(t, config))
                .into_iter()
                .collect::<Result<Vec<_>>>()?,
            Method::Standard | Method::Pratt => thetas
                .iter()
                .map(|&t| closed_form_region(t, config, method))
                .collect(),
        };
        let layer = if method == Method::Mixed {
            let t_max = config.theta_grid_max;
            let panels = 2 * ((t_max / LAYER_PANEL_WIDTH).ceil() as usize).max(1);
            let rule = Rule::composite(-t_max, t_max, panels, config.quadrature_order);
            let nodes = par::map_range(rule.len(), |i| {
                acceptance_region(rule.nodes[i], config).map(|r| LayerNode {
                    weight: rule.weights[i],
                    lower: r.lower,
                    upper: r.upper,
                })
            });
            nodes.into_iter().collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self { method, config: config.clone(), thetas, regions, layer })
    }

    /// Family for `config.w`: Pratt when `w = 0`, mixed otherwise.
    pub fn for_weight(config: &ProblemConfig) -> Result<Self> {
        let method = if config.w == 0.0 { Method::Pratt } else { Method::Mixed };
        Self::build(config, method)
    }

    /// Acceptance region at an arbitrary θ (not necessarily on the grid).
    pub fn region_at(&self, theta: f64) -> Result<AcceptanceRegion> {
        match self.method {
            Method::Mixed => acceptance_region(theta, &self.config),
            m => Ok(closed_form_region(theta, &self.config, m)),
        }
    }

    /// `C(x) = {θ : x ∈ A(θ)}`. For the mixed family the accepted grid
    /// points are located first and each boundary is refined by bisection
    /// in θ to `tol_root`.
    pub fn confidence_set(&self, x: f64) -> Result<ConfidenceSet> {
        self.invert(x, true)
    }

    /// As [`confidence_set`](Self::confidence_set) but the boundaries are
    /// linearly interpolated between grid points instead of re-solved. Much
    /// faster; accuracy is second order in the grid step.
    pub fn confidence_set_interpolated(&self, x: f64) -> Result<ConfidenceSet> {
        self.invert(x, false)
    }

    fn invert(&self, x: f64, exact: bool) -> Result<ConfidenceSet> {
        match self.method {
            Method::Standard => {
                return Ok(ConfidenceSet {
                    interval: standard_interval(x, self.config.alpha),
                    contiguous: true,
                })
            }
            Method::Pratt => {
                return Ok(ConfidenceSet {
                    interval: pratt_interval(x, self.config.alpha),
                    contiguous: true,
                })
            }
            Method::Mixed => {}
        }
        let accepted: Vec<usize> = self
            .regions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.contains(x))
            .map(|(i, _)| i)
            .collect();
        let (first, last) = match (accepted.first(), accepted.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(Error::OutOfGrid { x }),
        };
        if first == 0 || last + 1 == self.regions.len() {
            return Err(Error::OutOfGrid { x });
        }
        let contiguous = last - first + 1 == accepted.len();
        let (lower, upper) = if exact {
            (
                self.refine(x, self.thetas[first - 1], self.thetas[first])?,
                self.refine(x, self.thetas[last + 1], self.thetas[last])?,
            )
        } else {
            (
                self.interpolate(x, first - 1, first),
                self.interpolate(x, last + 1, last),
            )
        };
        Ok(ConfidenceSet { interval: Interval::new(lower, upper), contiguous })
    }

    // Bisection between a rejecting θ and an accepting θ.
    fn refine(&self, x: f64, mut out: f64, mut inside: f64) -> Result<f64> {
        while (inside - out).abs() > self.config.tol_root {
            let mid = 0.5 * (out + inside);
            if mid == out || mid == inside {
                break;
            }
            if self.region_at(mid)?.contains(x) {
                inside = mid;
            } else {
                out = mid;
            }
        }
        Ok(0.5 * (out + inside))
    }

    fn interpolate(&self, x: f64, out: usize, inside: usize) -> f64 {
        let (ro, ri) = (&self.regions[out], &self.regions[inside]);
        // the boundary that x crosses: upper when θ moves up past x, lower otherwise
        let (fo, fi) = if x > ro.upper {
            (x - ro.upper, x - ri.upper)
        } else {
            (x - ro.lower, x - ri.lower)
        };
        let s = if fo == fi { 0.5 } else { fo / (fo - fi) };
        ro.theta + s.clamp(0.0, 1.0) * (ri.theta - ro.theta)
    }

    /// `E_θ L(C(X))`, via `∫ P_θ(X ∈ A(θ′)) dθ′` for the mixed family.
    ///
    /// Beyond `±theta_grid_max` the regions are taken to be the standard ones,
    /// which the mixed regions approach as `|θ′| → ∞`.
    pub fn expected_length(&self, theta: f64) -> f64 {
        let alpha = self.config.alpha;
        match self.method {
            Method::Standard => 2.0 * self.config.z_half_alpha(),
            Method::Pratt => {
                let z = self.config.z_alpha();
                partial_expectation(theta + z) + partial_expectation(z - theta)
            }
            Method::Mixed => {
                let body: f64 = self
                    .layer
                    .iter()
                    .map(|n| {
                        n.weight * (normal_cdf(n.upper - theta) - normal_cdf(n.lower - theta))
                    })
                    .sum();
                let z = crate::special::normal_quantile(0.5 * alpha).expect("alpha validated");
                let t = self.config.theta_grid_max;
                let tail = |shift: f64| {
                    partial_expectation(-(t - z + shift)) - partial_expectation(-(t + z + shift))
                };
                body + tail(-theta) + tail(theta)
            }
        }
    }

    /// `e(θ) = (E_θ L(C) / E_θ L(C_S))²`.
    pub fn efficiency(&self, theta: f64) -> f64 {
        let ratio = self.expected_length(theta) / (2.0 * self.config.z_half_alpha());
        ratio * ratio
    }

    pub fn efficiency_curve(&self) -> EfficiencyCurve {
        let values = par::map(&self.thetas, |&t| self.efficiency(t));
        EfficiencyCurve::new(self.thetas.clone(), values, self.efficiency(0.0))
    }
}

/// `Ψ(m) = ∫_{−∞}^m Φ(s) ds = m Φ(m) + φ(m)`.
pub(crate) fn partial_expectation(m: f64) -> f64 {
    m * normal_cdf(m) + normal_pdf(m)
}

fn closed_form_region(theta: f64, config: &ProblemConfig, method: Method) -> AcceptanceRegion {
    let (lower, upper) = match method {
        Method::Standard => {
            let z = config.z_half_alpha();
            (theta - z, theta + z)
        }
        Method::Pratt => {
            let z = config.z_alpha();
            if theta > 0.0 {
                (theta - z, f64::INFINITY)
            } else if theta < 0.0 {
                (f64::NEG_INFINITY, theta + z)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
        Method::Mixed => unreachable!("mixed regions are solved numerically"),
    };
    AcceptanceRegion { theta, lower, upper, c: None }
}

/// Efficiency values on a θ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub e_at_zero: f64,
    pub e_max: f64,
}

impl EfficiencyCurve {
    pub fn new(thetas: Vec<f64>, values: Vec<f64>, e_at_zero: f64) -> Self {
        assert_eq!(thetas.len(), values.len());
        let e_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { thetas, values, e_at_zero, e_max }
    }

    /// θ at which the maximum is attained (first occurrence).
    pub fn argmax(&self) -> f64 {
        let i = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.values[best] { i } else { best });
        self.thetas[i]
    }
}
