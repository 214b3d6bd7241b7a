use serde::{Deserialize, Serialize};

use super::sqp::{self, LinearRow, Problem, SqpSettings};
use super::Evaluator;
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::Rule;
use crate::special::normal_pdf;
use crate::spline::{ClampedCubic, MonotoneCubicB};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Coverage is constrained on `0, step, …, max`.
    pub constraint_theta_max: f64,
    pub constraint_theta_step: f64,
    /// Post-hoc coverage check on `0, step, …, max`.
    pub verify_theta_max: f64,
    pub verify_theta_step: f64,
    /// Allowed coverage shortfall on the verification grid.
    pub verify_tol: f64,
    /// Extra solves with the worst verification points added as constraints.
    pub refine_rounds: usize,
    /// Multiplier on `coverage − (1 − α)` inside the solver.
    pub coverage_scale: f64,
    /// Lower bound on `b′` at the sampled points.
    pub slope_floor: f64,
    pub samples_per_piece: usize,
    #[serde(skip)]
    pub sqp: SqpSettings,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            constraint_theta_max: 12.0,
            constraint_theta_step: 0.25,
            verify_theta_max: 16.0,
            verify_theta_step: 0.0625,
            verify_tol: 1e-4,
            refine_rounds: 3,
            coverage_scale: 100.0,
            slope_floor: 0.02,
            samples_per_piece: 16,
            sqp: SqpSettings::default(),
        }
    }
}

impl OptimizerSettings {
    pub fn constraint_grid(&self) -> Vec<f64> {
        grid(self.constraint_theta_max, self.constraint_theta_step)
    }

    pub fn verify_grid(&self) -> Vec<f64> {
        grid(self.verify_theta_max, self.verify_theta_step)
    }
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let k = (max / step + 1e-9).floor() as usize;
    (0..=k).map(|i| i as f64 * step).collect()
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub b: MonotoneCubicB,
    /// Weighted length criterion at `b`.
    pub objective: f64,
    /// Minimum coverage over the verification grid.
    pub min_coverage: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Number of knots in `[-q, q]` at spacing `knot_step`.
pub fn knot_count(config: &ProblemConfig) -> usize {
    (2.0 * config.q / config.knot_step).round() as usize + 1
}

/// The optimization over the interior knot values of `b`.
pub(crate) struct KnotProblem<'a> {
    eval: &'a Evaluator,
    q: f64,
    t: f64,
    target: f64,
    scale: f64,
    thetas: Vec<f64>,
    /// Cardinal splines: one at interior knot `i`, zero at the other knots,
    /// zero end slopes.
    basis: Vec<ClampedCubic>,
    /// Objective gradient; the criterion is affine in the knot values.
    gradient: Vec<f64>,
    half_y: Rule,
    kernel: Vec<f64>,
    linear: Vec<LinearRow>,
}

impl<'a> KnotProblem<'a> {
    pub(crate) fn new(
        eval: &'a Evaluator,
        config: &ProblemConfig,
        thetas: Vec<f64>,
        settings: &OptimizerSettings,
    ) -> Result<Self> {
        let count = knot_count(config);
        if count < 3 {
            return Err(Error::Config("need at least one interior knot".into()));
        }
        let q = config.q;
        let t = config.t_half_alpha();
        let h = 2.0 * q / (count - 1) as f64;
        let free = count - 2;
        let basis: Vec<ClampedCubic> = (0..free)
            .map(|i| {
                let mut v = vec![0.0; count];
                v[i + 1] = 1.0;
                ClampedCubic::new(-q, h, v, 0.0, 0.0)
            })
            .collect();
        let standard = MonotoneCubicB::standard(q, t, count)?;
        let half_y = eval.half_y_rule(&standard);
        let kernel = eval.criterion_kernel(&half_y, config.w);
        let gradient = basis
            .iter()
            .map(|bi| {
                2.0 * half_y
                    .nodes
                    .iter()
                    .zip(&half_y.weights)
                    .zip(&kernel)
                    .map(|((&y, &wy), &k)| wy * k * (bi.eval(y) + bi.eval(-y)))
                    .sum::<f64>()
            })
            .collect();

        // b = b0 + Σ v_i B_i, with b0 taking the end values and unit end slopes
        let mut end = vec![0.0; count];
        end[0] = -q + t;
        end[count - 1] = q + t;
        let b0 = ClampedCubic::new(-q, h, end, 1.0, 1.0);
        let m = settings.samples_per_piece.max(2);
        let mut linear = Vec::new();
        for k in 0..(count - 1) * m {
            let y = -q + k as f64 * h / m as f64;
            linear.push(LinearRow {
                a: basis.iter().map(|bi| bi.derivative(y)).collect(),
                lower: settings.slope_floor - b0.derivative(y),
            });
            if y > 0.0 {
                linear.push(LinearRow {
                    a: basis.iter().map(|bi| bi.eval(y) + bi.eval(-y)).collect(),
                    lower: -(b0.eval(y) + b0.eval(-y)),
                });
            }
        }
        Ok(Self {
            eval,
            q,
            t,
            target: 1.0 - config.alpha,
            scale: settings.coverage_scale,
            thetas,
            basis,
            gradient,
            half_y,
            kernel,
            linear,
        })
    }

    pub(crate) fn knot_values(&self, free: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(free.len() + 2);
        v.push(-self.q + self.t);
        v.extend_from_slice(free);
        v.push(self.q + self.t);
        v
    }

    pub(crate) fn spline(&self, free: &[f64]) -> MonotoneCubicB {
        MonotoneCubicB::build_unchecked(&self.knot_values(free), self.q, self.t)
            .expect("end values fixed by construction")
    }

    pub(crate) fn standard_start(&self) -> Vec<f64> {
        let count = self.basis.len() + 2;
        let h = 2.0 * self.q / (count - 1) as f64;
        (1..count - 1).map(|i| -self.q + i as f64 * h + self.t).collect()
    }

    fn criterion(&self, b: &MonotoneCubicB) -> f64 {
        2.0 * self
            .half_y
            .nodes
            .iter()
            .zip(&self.half_y.weights)
            .zip(&self.kernel)
            .map(|((&y, &wy), &k)| wy * k * (b.eval(y) + b.eval(-y) - 2.0 * self.t))
            .sum::<f64>()
    }

    /// Coverage at θ and its gradient in the interior knot values.
    pub(crate) fn coverage_with_gradient(&self, theta: f64, b: &MonotoneCubicB) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.basis.len()];
        let mut value = 0.0;
        for (r, wf) in self.eval.r_rule() {
            let yu = b.inverse(-theta / r);
            let yl = b.inverse(theta / r);
            let u = -r * yu - theta;
            let l = r * yl - theta;
            value += wf * (crate::special::normal_cdf(u) - crate::special::normal_cdf(l));
            for (y, dens) in [(yu, normal_pdf(u)), (yl, normal_pdf(l))] {
                if y.abs() < self.q {
                    let factor = wf * r * dens / b.derivative(y);
                    for (g, bi) in grad.iter_mut().zip(&self.basis) {
                        *g += factor * bi.eval(y);
                    }
                }
            }
        }
        (value, grad)
    }
}

impl Problem for KnotProblem<'_> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.criterion(&self.spline(x))
    }

    fn objective_gradient(&self, _x: &[f64]) -> Vec<f64> {
        self.gradient.clone()
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let b = self.spline(x);
        par::map(&self.thetas, |&th| self.scale * (self.eval.coverage(th, &b) - self.target))
    }

    fn constraints_with_jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let b = self.spline(x);
        let rows = par::map(&self.thetas, |&th| self.coverage_with_gradient(th, &b));
        rows.into_iter()
            .map(|(c, g)| {
                (
                    self.scale * (c - self.target),
                    g.into_iter().map(|v| v * self.scale).collect(),
                )
            })
            .unzip()
    }

    fn linear_rows(&self) -> &[LinearRow] {
        &self.linear
    }
}

/// Minimize the weighted length criterion over the interior knot values,
/// subject to monotonicity, `b(y) + b(−y) ≥ 0`, and coverage `≥ 1 − α`.
pub fn optimize_b(config: &ProblemConfig) -> Result<OptimizationResult> {
    optimize_b_with(config, &OptimizerSettings::default())
}

pub fn optimize_b_with(
    config: &ProblemConfig,
    settings: &OptimizerSettings,
) -> Result<OptimizationResult> {
    config.validate()?;
    let eval = Evaluator::for_config(config)?;
    let target = 1.0 - config.alpha;
    let verify = settings.verify_grid();
    let mut thetas = settings.constraint_grid();

    let mut start: Option<Vec<f64>> = None;
    let mut iterations = 0;
    for round in 0..=settings.refine_rounds {
        let problem = KnotProblem::new(&eval, config, thetas.clone(), settings)?;
        let x0 = start.clone().unwrap_or_else(|| problem.standard_start());
        let out = sqp::solve(&problem, &x0, &settings.sqp)?;
        iterations += out.iterations;

        let b = problem.spline(&out.x);
        let shape_ok = b.check_shape().is_ok();
        let cover = par::map(&verify, |&th| eval.coverage(th, &b));
        let min_coverage = cover.iter().copied().fold(f64::INFINITY, f64::min);
        let verified = shape_ok && min_coverage >= target - settings.verify_tol;
        if verified || round == settings.refine_rounds {
            if !shape_ok {
                break;
            }
            return Ok(OptimizationResult {
                objective: eval.objective(&b, config.w),
                b,
                min_coverage,
                iterations,
                converged: out.converged && verified,
            });
        }
        // add the local minima of coverage that fall short
        for i in 0..verify.len() {
            let left = if i == 0 { f64::INFINITY } else { cover[i - 1] };
            let right = cover.get(i + 1).copied().unwrap_or(f64::INFINITY);
            if cover[i] < target && cover[i] <= left && cover[i] <= right {
                thetas.push(verify[i]);
            }
        }
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
        start = Some(out.x);
    }

    // nothing usable: the standard b is always feasible
    let b = MonotoneCubicB::standard(config.q, config.t_half_alpha(), knot_count(config))?;
    Ok(OptimizationResult {
        objective: eval.objective(&b, config.w),
        min_coverage: target,
        b,
        iterations,
        converged: false,
    })
}
