//! Small dense SQP: damped BFGS on the Lagrangian, QP subproblems solved by
//! clarabel with an elastic slack on the nonlinear rows and a box trust
//! region, and a backtracking line search on the ℓ1 merit function.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};

/// `a · x ≥ lower`.
#[derive(Debug, Clone)]
pub struct LinearRow {
    pub a: Vec<f64>,
    pub lower: f64,
}

/// Minimize `f(x)` subject to `c(x) ≥ 0` and linear rows.
pub trait Problem: Sync {
    fn dim(&self) -> usize;
    fn objective(&self, x: &[f64]) -> f64;
    fn objective_gradient(&self, x: &[f64]) -> Vec<f64>;
    fn constraints(&self, x: &[f64]) -> Vec<f64>;
    /// Values and Jacobian rows of `c`.
    fn constraints_with_jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>);
    fn linear_rows(&self) -> &[LinearRow];
}

#[derive(Debug, Clone)]
pub struct SqpSettings {
    pub max_iterations: usize,
    /// Stop when the step is shorter than this (∞-norm).
    pub step_tol: f64,
    /// Largest violation of `c ≥ 0` counted as feasible.
    pub feasibility_tol: f64,
    pub initial_radius: f64,
    pub min_radius: f64,
    /// Cost per unit of elastic slack in the subproblem.
    pub slack_penalty: f64,
    pub initial_hessian: f64,
}

impl Default for SqpSettings {
    fn default() -> Self {
        Self {
            max_iterations: 150,
            step_tol: 1e-8,
            feasibility_tol: 1e-7,
            initial_radius: 0.25,
            min_radius: 1e-10,
            slack_penalty: 1e3,
            initial_hessian: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SqpOutcome {
    /// Best feasible iterate seen (the start if none improved on it).
    pub x: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn violation(c: &[f64]) -> f64 {
    c.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max)
}

fn total_violation(c: &[f64]) -> f64 {
    c.iter().map(|&v| (-v).max(0.0)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Subproblem {
    step: Vec<f64>,
    multipliers: Vec<f64>,
}

/// Upper triangle of a dense symmetric matrix, padded with zero rows/columns
/// up to `size`.
fn upper_csc(m: &[Vec<f64>], size: usize) -> CscMatrix<f64> {
    let mut colptr = vec![0];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for j in 0..size {
        for i in 0..=j {
            if i < m.len() && j < m.len() && m[i][j] != 0.0 {
                rowval.push(i);
                nzval.push(m[i][j]);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(size, size, colptr, rowval, nzval)
}

fn dense_csc(rows: &[Vec<f64>], cols: usize) -> CscMatrix<f64> {
    let mut colptr = vec![0];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for j in 0..cols {
        for (i, row) in rows.iter().enumerate() {
            if row[j] != 0.0 {
                rowval.push(i);
                nzval.push(row[j]);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows.len(), cols, colptr, rowval, nzval)
}

// min gᵀd + ½dᵀBd + ρ s  s.t.  c + J d + s ≥ 0,  lin rows at x + d,  s ≥ 0,  |d| ≤ Δ
#[allow(clippy::too_many_arguments)]
fn solve_subproblem(
    x: &[f64],
    grad: &[f64],
    hess: &[Vec<f64>],
    c: &[f64],
    jac: &[Vec<f64>],
    linear: &[LinearRow],
    radius: f64,
    slack_penalty: f64,
) -> Result<Subproblem> {
    let n = x.len();
    let nv = n + 1;
    let p = upper_csc(hess, nv);
    let mut q = grad.to_vec();
    q.push(slack_penalty);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for (cj, jr) in c.iter().zip(jac) {
        let mut row: Vec<f64> = jr.iter().map(|v| -v).collect();
        row.push(-1.0);
        rows.push(row);
        rhs.push(*cj);
    }
    for lr in linear {
        let mut row: Vec<f64> = lr.a.iter().map(|v| -v).collect();
        row.push(0.0);
        rows.push(row);
        rhs.push(dot(&lr.a, x) - lr.lower);
    }
    let mut slack_row = vec![0.0; nv];
    slack_row[n] = -1.0;
    rows.push(slack_row);
    rhs.push(0.0);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; nv];
            row[i] = sign;
            rows.push(row);
            rhs.push(radius);
        }
    }
    let a = dense_csc(&rows, nv);
    let cones = [SupportedConeT::NonnegativeConeT(rows.len())];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .build()
        .map_err(|e| Error::Subproblem(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings)
        .map_err(|e| Error::Subproblem(format!("{e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        other => return Err(Error::Subproblem(format!("status {other:?}"))),
    }
    Ok(Subproblem {
        step: solver.solution.x[..n].to_vec(),
        multipliers: solver.solution.z[..c.len()].to_vec(),
    })
}

fn lagrangian_gradient(grad: &[f64], jac: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    let mut g = grad.to_vec();
    for (row, &l) in jac.iter().zip(lambda) {
        for (gi, ri) in g.iter_mut().zip(row) {
            *gi -= l * ri;
        }
    }
    g
}

// Powell-damped BFGS update of B with step s and gradient change y.
fn bfgs_update(hess: &mut [Vec<f64>], s: &[f64], y: &[f64]) {
    let n = s.len();
    let bs: Vec<f64> = (0..n).map(|i| dot(&hess[i], s)).collect();
    let sbs = dot(s, &bs);
    if !(sbs > 1e-300) {
        return;
    }
    let sy = dot(s, y);
    let theta = if sy >= 0.2 * sbs { 1.0 } else { 0.8 * sbs / (sbs - sy) };
    let r: Vec<f64> = (0..n).map(|i| theta * y[i] + (1.0 - theta) * bs[i]).collect();
    let sr = dot(s, &r);
    if !(sr > 1e-300) {
        return;
    }
    for i in 0..n {
        for j in 0..n {
            hess[i][j] += r[i] * r[j] / sr - bs[i] * bs[j] / sbs;
        }
    }
}

/// Run SQP from `x0`, which must satisfy the linear rows.
pub fn solve(problem: &dyn Problem, x0: &[f64], settings: &SqpSettings) -> Result<SqpOutcome> {
    let n = problem.dim();
    let linear = problem.linear_rows();
    let mut x = x0.to_vec();
    let mut hess: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { settings.initial_hessian } else { 0.0 }).collect())
        .collect();
    let mut radius = settings.initial_radius;
    let mut penalty = 1.0;

    let mut f = problem.objective(&x);
    let mut grad = problem.objective_gradient(&x);
    let (mut c, mut jac) = problem.constraints_with_jacobian(&x);

    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let record = |x: &[f64], f: f64, c: &[f64], best: &mut Option<(Vec<f64>, f64, f64)>| {
        let v = violation(c);
        if v <= settings.feasibility_tol && best.as_ref().is_none_or(|b| f < b.1) {
            *best = Some((x.to_vec(), f, v));
        }
    };
    record(&x, f, &c, &mut best);

    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        iterations += 1;
        let sub = match solve_subproblem(
            &x,
            &grad,
            &hess,
            &c,
            &jac,
            linear,
            radius,
            settings.slack_penalty,
        ) {
            Ok(s) => s,
            Err(_) if radius > settings.min_radius => {
                radius *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let d = sub.step;
        let dnorm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if dnorm < settings.step_tol {
            converged = violation(&c) <= settings.feasibility_tol;
            if converged {
                break;
            }
        }
        let lambda_max = sub.multipliers.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if penalty < 1.5 * lambda_max {
            penalty = 2.0 * lambda_max;
        }

        let merit = |fv: f64, cv: &[f64]| fv + penalty * total_violation(cv);
        let m0 = merit(f, &c);
        // directional derivative of the merit function along d
        let slope = dot(&grad, &d) - penalty * total_violation(&c);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let ft = problem.objective(&trial);
            let ct = problem.constraints(&trial);
            if merit(ft, &ct) <= m0 + 1e-4 * step * slope.min(0.0) + 1e-14 * m0.abs() {
                accepted = Some((trial, step));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, step)) = accepted else {
            radius *= 0.25;
            if radius < settings.min_radius {
                break;
            }
            continue;
        };
        if step == 1.0 && dnorm >= 0.99 * radius {
            radius = (radius * 2.0).min(4.0);
        } else if step < 1.0 {
            radius = (radius * 0.5).max(dnorm * step);
        }

        let f_new = problem.objective(&trial);
        let grad_new = problem.objective_gradient(&trial);
        let (c_new, jac_new) = problem.constraints_with_jacobian(&trial);
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = lagrangian_gradient(&grad_new, &jac_new, &sub.multipliers)
            .iter()
            .zip(lagrangian_gradient(&grad, &jac, &sub.multipliers))
            .map(|(a, b)| a - b)
            .collect();
        bfgs_update(&mut hess, &s, &y);

        x = trial;
        f = f_new;
        grad = grad_new;
        c = c_new;
        jac = jac_new;
        record(&x, f, &c, &mut best);

        let moved = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if moved < settings.step_tol && violation(&c) <= settings.feasibility_tol {
            converged = true;
            break;
        }
    }

    let (x, objective, max_violation) = match best {
        Some(b) => b,
        None => (x, f, violation(&c)),
    };
    Ok(SqpOutcome { x, objective, max_violation, iterations, converged })
}
