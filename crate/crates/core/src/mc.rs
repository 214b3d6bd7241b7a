//! Monte Carlo estimates of coverage and expected length for any interval
//! rule, used to check the quadrature results.
//!
//! Replications are split into fixed blocks. Block `k` draws from
//! `ChaCha8Rng` seeded with `seed` on stream `k`, and block summaries are
//! merged in block order, so an estimate depends only on `(seed, reps)` and
//! not on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::known_variance::{pratt_interval, AcceptanceFamily};
use crate::par;
use crate::special::{normal_quantile, t_quantile};
use crate::spline::MonotoneCubicB;
use crate::unknown_variance::interval_from_data;

/// Replications per RNG stream.
pub const BLOCK_SIZE: usize = 4096;

/// Sufficient statistics of one simulated sample, plus the known σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub xbar: f64,
    pub s: f64,
    pub sigma: f64,
    pub n: usize,
}

impl Sample {
    /// `σ/√n` (known variance).
    pub fn known_scale(&self) -> f64 {
        self.sigma / (self.n as f64).sqrt()
    }

    /// `S/√n` (unknown variance).
    pub fn estimated_scale(&self) -> f64 {
        self.s / (self.n as f64).sqrt()
    }
}

/// Maps a sample to an interval for μ.
pub trait IntervalRule: Sync {
    fn interval(&self, sample: &Sample) -> Interval;
}

impl<F> IntervalRule for F
where
    F: Fn(&Sample) -> Interval + Sync,
{
    fn interval(&self, sample: &Sample) -> Interval {
        self(sample)
    }
}

/// `x̄ ± z_{α/2} σ/√n`.
#[derive(Debug, Clone, Copy)]
pub struct StandardKnown {
    z: f64,
}

impl StandardKnown {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self { z: normal_quantile(0.5 * alpha)? })
    }
}

impl IntervalRule for StandardKnown {
    fn interval(&self, s: &Sample) -> Interval {
        let h = self.z * s.known_scale();
        Interval::new(s.xbar - h, s.xbar + h)
    }
}

/// Pratt's interval on the μ scale.
#[derive(Debug, Clone, Copy)]
pub struct PrattKnown {
    alpha: f64,
}

impl PrattKnown {
    pub fn new(alpha: f64) -> Result<Self> {
        normal_quantile(alpha)?;
        Ok(Self { alpha })
    }
}

impl IntervalRule for PrattKnown {
    fn interval(&self, s: &Sample) -> Interval {
        let scale = s.known_scale();
        pratt_interval(s.xbar / scale, self.alpha).scale(scale)
    }
}

/// Inverted acceptance family on the μ scale, with interpolated boundaries.
/// Observations beyond the grid get the standard interval, which the family
/// reverts to there.
pub struct FamilyKnown<'a> {
    family: &'a AcceptanceFamily,
    standard: StandardKnown,
}

impl<'a> FamilyKnown<'a> {
    pub fn new(family: &'a AcceptanceFamily) -> Result<Self> {
        Ok(Self { family, standard: StandardKnown::new(family.config.alpha)? })
    }
}

impl IntervalRule for FamilyKnown<'_> {
    fn interval(&self, s: &Sample) -> Interval {
        let scale = s.known_scale();
        match self.family.confidence_set_interpolated(s.xbar / scale) {
            Ok(set) => set.interval.scale(scale),
            Err(_) => self.standard.interval(s),
        }
    }
}

/// `x̄ ± t_{α/2,n−1} S/√n`.
#[derive(Debug, Clone, Copy)]
pub struct StandardT {
    t: f64,
}

impl StandardT {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        Ok(Self { t: t_quantile(0.5 * alpha, (n - 1) as u64)? })
    }
}

impl IntervalRule for StandardT {
    fn interval(&self, s: &Sample) -> Interval {
        let h = self.t * s.estimated_scale();
        Interval::new(s.xbar - h, s.xbar + h)
    }
}

/// The spline interval `[−(S/√n) b(−x̄√n/S), (S/√n) b(x̄√n/S)]`.
pub struct SplineRule<'a> {
    b: &'a MonotoneCubicB,
}

impl<'a> SplineRule<'a> {
    pub fn new(b: &'a MonotoneCubicB) -> Self {
        Self { b }
    }
}

impl IntervalRule for SplineRule<'_> {
    fn interval(&self, s: &Sample) -> Interval {
        interval_from_data(s.xbar, s.s, s.n, self.b).expect("simulated s is positive")
    }
}

/// How each replication is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// `X̄` and `S` from their exact joint law.
    #[default]
    Sufficient,
    /// `n` normal variates per replication.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean − value| ≤ k · std_error`, with a rounding allowance for
    /// estimates that have no spread.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12 * value.abs().max(1.0)
    }

    /// `(mean − value) / std_error`.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value) / self.std_error
    }
}

/// Running count, mean, and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

/// Simulation of `X_1, …, X_n ~ N(μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Simulation {
    pub fn new(mu: f64, sigma: f64, n: usize, reps: u64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        if reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { mu, sigma, n, reps, seed, mode: SamplingMode::Sufficient })
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    /// Simulation with `μ = θ σ/√n`.
    pub fn at_theta(theta: f64, sigma: f64, n: usize, reps: u64, seed: u64) -> Result<Self> {
        Self::new(theta * sigma / (n as f64).sqrt(), sigma, n, reps, seed)
    }

    fn block_rng(&self, block: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block as u64);
        rng
    }

    fn draw(&self, rng: &mut ChaCha8Rng, chi: &ChiSquared<f64>) -> Sample {
        let n = self.n as f64;
        match self.mode {
            SamplingMode::Sufficient => {
                let z: f64 = StandardNormal.sample(rng);
                let q = chi.sample(rng);
                Sample {
                    xbar: self.mu + self.sigma / n.sqrt() * z,
                    s: self.sigma * (q / (n - 1.0)).sqrt(),
                    sigma: self.sigma,
                    n: self.n,
                }
            }
            SamplingMode::Raw => {
                let mut m = Moments::default();
                for _ in 0..self.n {
                    let z: f64 = rng.sample(StandardNormal);
                    m.push(self.mu + self.sigma * z);
                }
                Sample { xbar: m.mean, s: (m.m2 / (n - 1.0)).sqrt(), sigma: self.sigma, n: self.n }
            }
        }
    }

    fn run(&self, stat: impl Fn(&Sample) -> f64 + Sync) -> Moments {
        let chi = ChiSquared::new((self.n - 1) as f64).expect("n ≥ 2");
        let reps = self.reps as usize;
        let blocks = reps.div_ceil(BLOCK_SIZE);
        let parts = par::map_range(blocks, |k| {
            let mut rng = self.block_rng(k);
            let mut m = Moments::default();
            let len = BLOCK_SIZE.min(reps - k * BLOCK_SIZE);
            for _ in 0..len {
                m.push(stat(&self.draw(&mut rng, &chi)));
            }
            m
        });
        parts.into_iter().fold(Moments::default(), Moments::merge)
    }

    fn estimate(&self, m: Moments) -> McEstimate {
        let var = if m.count > 1.0 { m.m2 / (m.count - 1.0) } else { 0.0 };
        McEstimate {
            mean: m.mean,
            std_error: (var / m.count).sqrt(),
            reps: self.reps,
            seed: self.seed,
        }
    }

    /// Fraction of replications whose interval contains μ, with the binomial
    /// standard error.
    pub fn coverage(&self, rule: &dyn IntervalRule) -> McEstimate {
        let m = self.run(|s| f64::from(u8::from(rule.interval(s).contains(self.mu))));
        let p = m.mean;
        McEstimate {
            mean: p,
            std_error: (p * (1.0 - p) / m.count).sqrt(),
            reps: self.reps,
            seed: self.seed,
        }
    }

    /// Mean interval length on the μ scale.
    pub fn expected_length(&self, rule: &dyn IntervalRule) -> McEstimate {
        self.estimate(self.run(|s| rule.interval(s).length()))
    }

    /// Standardized draws `√n (X̄ − μ)/σ`, for checking the generator.
    pub fn standardized_means(&self) -> McEstimate {
        let scale = (self.n as f64).sqrt() / self.sigma;
        self.estimate(self.run(|s| (s.xbar - self.mu) * scale))
    }

    /// `S²/σ²`, whose mean is 1.
    pub fn variance_ratios(&self) -> McEstimate {
        self.estimate(self.run(|s| (s.s / self.sigma).powi(2)))
    }
}

pub fn mc_coverage(
    mu: f64,
    sigma: f64,
    n: usize,
    rule: &dyn IntervalRule,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(Simulation::new(mu, sigma, n, reps, seed)?.coverage(rule))
}

pub fn mc_expected_length(
    mu: f64,
    sigma: f64,
    n: usize,
    rule: &dyn IntervalRule,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(Simulation::new(mu, sigma, n, reps, seed)?.expected_length(rule))
}
