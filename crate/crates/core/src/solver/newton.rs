//! Continuation in the right-hand side with damped Newton steps.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::matrix::SymMatrix;
use crate::concavity::sampling::sample_rng;
use crate::error::{Error, Result};
use crate::solver::domain::ConvexDomain;
use crate::solver::formulation::DirichletOperator;
use crate::solver::grid::{hessian_field, second_difference_weights, Grid, GridField};
use crate::solver::linear::{line_coefficients, linear_solve};

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const CONE_MARGIN: f64 = 1e-8;
pub const DAMPING: f64 = 0.5;
pub const MIN_STEP: f64 = 1e-8;
/// Required gap between `f` and the operator's threshold.
pub const RHS_MARGIN: f64 = 1e-6;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
pub const MAX_BISECTION_DEPTH: usize = 6;
pub const MAX_INITIAL_SCALE: f64 = 65536.0;
/// Multiplier on the rounding estimate of the discrete residual.
const NOISE_SAFETY: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub h: f64,
    pub continuity_steps: usize,
    /// Skip the `f > threshold` check (experiments only).
    pub allow_below_threshold: bool,
    /// Randomizes the starting point: initial scale in `[1, 16]` and a
    /// perturbation `rho (a x + b y)` with `a, b` in `[-1, 1]`.
    pub initial_seed: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            continuity_steps: 10,
            allow_below_threshold: false,
            initial_seed: None,
        }
    }
}

/// Newton history of one continuity step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub t_start: f64,
    pub t_end: f64,
    pub depth: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm residual of every accepted iterate, starting with the initial one.
    pub residuals: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// Smallest cone margin over nodes for every accepted iterate.
    pub cone_margins: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub failure: Option<String>,
    pub h: f64,
    pub nodes: usize,
    pub cut_points: usize,
    pub min_cut_fraction: f64,
    pub continuity_steps: usize,
    pub initial_scale: f64,
    pub initial_seed: Option<u64>,
    pub steps: Vec<StepReport>,
    pub iterations_per_step: Vec<usize>,
    pub linear_iterations: usize,
    pub final_residual: f64,
    pub residual_tolerance: f64,
    /// Rounding estimate of the residual at the final iterate.
    pub noise_floor: f64,
    pub cone_margin_trajectory: Vec<f64>,
    pub min_eig_plus_one: f64,
    pub damping: f64,
    pub cone_margin: f64,
    pub wall_time_s: f64,
}

impl SolveReport {
    /// JSON document; `wall_time_s` is dropped unless `timing` is set.
    pub fn to_json(&self, timing: bool) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if !timing {
            v.as_object_mut().expect("object").remove("wall_time_s");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// Node-wise `F(D^2_h u) - rhs`.
pub fn residual<O: DirichletOperator + ?Sized>(op: &O, u: &GridField, rhs: &[f64]) -> Vec<f64> {
    residual_from(op, &hessian_field(u), rhs)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Rounding estimate of the residual: cancellation in the second differences,
/// amplified by the linearization, plus the rounding of `F` and `rhs`.
fn noise_floor(
    u: &GridField,
    hess: &[SymMatrix<f64>],
    lin: &[SymMatrix<f64>],
    values: &[f64],
    rhs: &[f64],
) -> f64 {
    let grid = u.grid();
    let h = grid.h();
    (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let st = grid.stencil(node);
            let coef = line_coefficients(&lin[node]);
            let mut acc = 0.0;
            for (line, c) in coef.iter().enumerate() {
                let (p, m) = (st[2 * line], st[2 * line + 1]);
                let (wp, wm, w0) = second_difference_weights(p.fraction(), m.fraction(), h);
                let mag = (wp * u.neighbor_value(p)).abs()
                    + (wm * u.neighbor_value(m)).abs()
                    + (w0 * u.values[node]).abs();
                acc += c.abs() * mag;
            }
            let local = acc + values[node].abs() + rhs[node].abs() + hess[node].norm_max();
            NOISE_SAFETY * f64::EPSILON * local
        })
        .reduce(|| 0.0, f64::max)
}

struct Solver<'a, O: ?Sized> {
    op: &'a O,
    zero_boundary: GridField,
    linear_iterations: usize,
    margins: Vec<f64>,
    noise: f64,
}

enum StepFailure {
    Stagnation(String),
    Numerical(String),
}

impl<O: DirichletOperator + ?Sized> Solver<'_, O> {
    /// Smallest cone margin over all nodes, or `None` if some node is outside.
    fn cone_margin(&self, hess: &[SymMatrix<f64>]) -> Option<f64> {
        let statuses: Vec<Option<f64>> = hess
            .par_iter()
            .map(|m| match self.op.cone(m, CONE_MARGIN) {
                Ok(s) if s.inside => Some(s.margin_attained),
                _ => None,
            })
            .collect();
        statuses
            .into_iter()
            .try_fold(f64::INFINITY, |acc, s| s.map(|v| acc.min(v)))
    }

    fn newton(&mut self, u: &mut GridField, rhs: &[f64], step: &mut StepReport) -> Result<(), StepFailure> {
        let mut hess = hessian_field(u);
        let mut res: Vec<f64> = residual_from(self.op, &hess, rhs);
        let mut rn = sup(&res);
        step.residuals.push(rn);
        for _ in 0..=MAX_NEWTON_ITERATIONS {
            let lin: Vec<SymMatrix<f64>> = hess.par_iter().map(|m| self.op.gradient(m)).collect();
            let values: Vec<f64> = hess.par_iter().map(|m| self.op.value(m)).collect();
            self.noise = noise_floor(u, &hess, &lin, &values, rhs);
            let tol = RESIDUAL_TOLERANCE.max(self.noise);
            step.tolerance = tol;
            if rn <= tol {
                step.converged = true;
                return Ok(());
            }
            if step.iterations == MAX_NEWTON_ITERATIONS {
                break;
            }
            let neg: Vec<f64> = res.iter().map(|r| -r).collect();
            let (w, stats) = linear_solve(&lin, &neg, &self.zero_boundary)
                .map_err(|e| StepFailure::Numerical(e.to_string()))?;
            self.linear_iterations += stats.iterations;
            let mut s = 1.0;
            loop {
                let mut trial = u.clone();
                for (t, d) in trial.values.iter_mut().zip(&w.values) {
                    *t += s * d;
                }
                let th = hessian_field(&trial);
                if let Some(margin) = self.cone_margin(&th) {
                    let tr = residual_from(self.op, &th, rhs);
                    let tn = sup(&tr);
                    if tn < rn {
                        *u = trial;
                        hess = th;
                        res = tr;
                        rn = tn;
                        step.iterations += 1;
                        step.residuals.push(rn);
                        step.step_sizes.push(s);
                        step.cone_margins.push(margin);
                        self.margins.push(margin);
                        break;
                    }
                }
                s *= DAMPING;
                if s < MIN_STEP {
                    return Err(StepFailure::Stagnation(format!(
                        "Newton stagnated (step < {MIN_STEP:e}) at residual {rn:e}"
                    )));
                }
            }
        }
        Err(StepFailure::Stagnation(format!(
            "Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations (residual {rn:e})"
        )))
    }

    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        u: &mut GridField,
        f: &[f64],
        rhs0: &[f64],
        ta: f64,
        tb: f64,
        depth: usize,
        steps: &mut Vec<StepReport>,
    ) -> Result<(), StepFailure> {
        let rhs: Vec<f64> = f
            .iter()
            .zip(rhs0)
            .map(|(fv, r0)| tb * fv + (1.0 - tb) * r0)
            .collect();
        let backup = u.clone();
        let mut step = StepReport {
            t_start: ta,
            t_end: tb,
            depth,
            converged: false,
            iterations: 0,
            residuals: Vec::new(),
            step_sizes: Vec::new(),
            cone_margins: Vec::new(),
            tolerance: RESIDUAL_TOLERANCE,
        };
        let outcome = self.newton(u, &rhs, &mut step);
        steps.push(step);
        match outcome {
            Ok(()) => Ok(()),
            Err(e) if depth >= MAX_BISECTION_DEPTH => Err(e),
            Err(_) => {
                *u = backup;
                let mid = 0.5 * (ta + tb);
                self.advance(u, f, rhs0, ta, mid, depth + 1, steps)?;
                self.advance(u, f, rhs0, mid, tb, depth + 1, steps)
            }
        }
    }
}

fn residual_from<O: DirichletOperator + ?Sized>(op: &O, hess: &[SymMatrix<f64>], rhs: &[f64]) -> Vec<f64> {
    hess.par_iter()
        .zip(rhs.par_iter())
        .map(|(m, r)| op.value(m) - r)
        .collect()
}

/// Solves `F(D^2 u) = f` in `domain` with `u = phi` on the boundary.
///
/// Starts from `u0 = phi + R rho` with `R` doubled until `u0` is inside the cone
/// and `F(D^2 u0) >= max f`, then continues `rhs_t = t f + (1 - t) F(D^2 u0)`
/// in equal steps, bisecting failed steps. A Newton failure is reported in the
/// returned [`SolveReport`] together with the last accepted iterate.
pub fn solve_dirichlet<O: DirichletOperator + ?Sized>(
    op: &O,
    domain: ConvexDomain,
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    phi: &(dyn Fn(f64, f64) -> f64 + Sync),
    options: SolveOptions,
) -> Result<(GridField, SolveReport)> {
    let started = Instant::now();
    if op.dim() != 2 {
        return Err(Error::domain(format!(
            "the grid solver is planar (n = 2); operator has n = {}",
            op.dim()
        )));
    }
    if options.continuity_steps == 0 {
        return Err(Error::domain("continuity needs at least one step"));
    }
    let grid = Arc::new(Grid::new(domain, options.h)?);
    let f_field = GridField::from_fn(grid.clone(), f);
    if !f_field.is_finite() {
        return Err(Error::domain("right-hand side is not finite on the grid"));
    }
    let threshold = op.rhs_threshold();
    if !options.allow_below_threshold {
        let low = f_field
            .values
            .iter()
            .chain(&f_field.boundary)
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if !(low > threshold + RHS_MARGIN) {
            return Err(Error::precondition(format!(
                "existence theory requires f > n - 1 = {threshold} on the closed domain (margin {RHS_MARGIN:e}); min f = {low}"
            )));
        }
    }
    let f_max = f_field.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let phi_field = GridField::from_fn(grid.clone(), phi);
    if !phi_field.is_finite() {
        return Err(Error::domain("boundary data is not finite on the grid"));
    }

    let mut solver = Solver {
        op,
        zero_boundary: GridField::zeros(grid.clone()),
        linear_iterations: 0,
        margins: Vec::new(),
        noise: 0.0,
    };

    let (mut scale, tilt) = match options.initial_seed {
        Some(seed) => {
            let mut rng = sample_rng(seed, 0);
            (
                rng.random_range(1.0..=16.0),
                [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
            )
        }
        None => (1.0, [0.0, 0.0]),
    };
    let (mut u, rhs0) = loop {
        let values = phi_field
            .values
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let [x, y] = grid.position(k);
                let rho = domain.rho(x, y);
                p + scale * rho + rho * (tilt[0] * x + tilt[1] * y)
            })
            .collect();
        let u0 = GridField::new(grid.clone(), values, phi_field.boundary.clone())?;
        let hess = hessian_field(&u0);
        let rhs0: Vec<f64> = hess.par_iter().map(|m| op.value(m)).collect();
        if solver.cone_margin(&hess).is_some() && rhs0.iter().all(|&v| v >= f_max) {
            break (u0, rhs0);
        }
        scale *= 2.0;
        if scale > MAX_INITIAL_SCALE {
            return Err(Error::Numerical {
                stage: "initial guess".into(),
                reason: format!("no cone-interior supersolution phi + R rho with R <= {MAX_INITIAL_SCALE}"),
                residual: f64::NAN,
            });
        }
    };

    let mut steps = Vec::new();
    let mut failure = None;
    let n_t = options.continuity_steps;
    for k in 0..n_t {
        let ta = k as f64 / n_t as f64;
        let tb = (k + 1) as f64 / n_t as f64;
        if let Err(e) = solver.advance(&mut u, &f_field.values, &rhs0, ta, tb, 0, &mut steps) {
            failure = Some(match e {
                StepFailure::Stagnation(m) => m,
                StepFailure::Numerical(m) => m,
            });
            break;
        }
    }

    let hess = hessian_field(&u);
    let final_res = sup(&residual_from(op, &hess, &f_field.values));
    let min_eig_plus_one = hess
        .par_iter()
        .map(|m| crate::algebra::eigen::min_eigenvalue(m).map_or(f64::NAN, |e| e + 1.0))
        .reduce(|| f64::INFINITY, f64::min);
    let tolerance = steps.last().map_or(RESIDUAL_TOLERANCE, |s: &StepReport| s.tolerance);
    let report = SolveReport {
        converged: failure.is_none(),
        failure,
        h: options.h,
        nodes: grid.len(),
        cut_points: grid.cuts().len(),
        min_cut_fraction: grid.min_fraction(),
        continuity_steps: n_t,
        initial_scale: scale,
        initial_seed: options.initial_seed,
        iterations_per_step: steps.iter().map(|s| s.iterations).collect(),
        steps,
        linear_iterations: solver.linear_iterations,
        final_residual: final_res,
        residual_tolerance: tolerance,
        noise_floor: solver.noise,
        cone_margin_trajectory: solver.margins,
        min_eig_plus_one,
        damping: DAMPING,
        cone_margin: CONE_MARGIN,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok((u, report))
}
