//! Proximal gradient solver for one regularized problem and the warm-started
//! regularization path.
//!
//! The smooth part is the tracking functional `J`; the Tikhonov term, the L1
//! term and the box indicator are handled exactly by the cellwise prox
//!
//! ```text
//! prox_s(w) = clamp( shrink(w, sβ) / (1 + sα), u_lo, u_hi ),    w = u − s J'(u)
//! ```
//!
//! Trial steps `s` come from a Barzilai–Borwein estimate on `J'`, and the
//! accepted point is found by Armijo backtracking along `u + t (prox_s(w) − u)`.
//! As `s → ∞` the trial point becomes the fixed-point map
//! `P_box(−soft_β(p_u)/α)`, which is also available as a mode of its own.

use serde::{Deserialize, Serialize};

use crate::control::{shrink, ControlProblem, Evaluation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::{FeFunction, Space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Tolerance on the L∞ stationarity residual.
    pub tol: f64,
    pub max_outer: usize,
    pub armijo_c: f64,
    /// First trial step; `None` means `1 / (1 + α)`.
    pub step_init: Option<f64>,
    pub max_backtracks: usize,
    /// Iterate the fixed-point map `P_box(−soft_β(p)/α)` instead of prox-gradient steps.
    pub fixed_point: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_outer: 1000, armijo_c: 1e-4, step_init: None, max_backtracks: 40, fixed_point: false }
    }
}

const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularizedSolution {
    pub alpha: f64,
    pub u: FeFunction,
    pub y: FeFunction,
    pub p: FeFunction,
    pub objective_value: f64,
    pub stationarity: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub newton_iters: usize,
    /// Full objective at every accepted iterate, starting with the initial point.
    pub objective_history: Vec<f64>,
}

/// Slack for comparing objective values that agree to rounding.
fn rounding_slack(f: f64) -> f64 {
    16.0 * f64::EPSILON * f.abs().max(1.0)
}

fn prox_step(problem: &ControlProblem, u: &FeFunction, grad: &FeFunction, step: f64, alpha: f64) -> FeFunction {
    let beta = problem.beta();
    let (lo, hi) = problem.bounds();
    let values = u
        .values()
        .iter()
        .zip(grad.values())
        .zip(lo.values().iter().zip(hi.values()))
        .map(|((&ui, &gi), (&l, &h))| {
            let w = ui - step * gi;
            (shrink(w, step * beta) / (1.0 + step * alpha)).clamp(l, h)
        })
        .collect();
    FeFunction::new(*u.mesh(), Space::P0, values).expect("same mesh")
}

/// Solves the problem for one `α > 0`.
///
/// Running out of iterations is not an error: the last iterate is returned
/// with `converged == false`. PDE failures propagate.
pub fn solve_regularized(
    problem: &ControlProblem,
    alpha: f64,
    u_init: Option<&FeFunction>,
    opts: &OptimizerOptions,
) -> Result<RegularizedSolution> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let mut u = match u_init {
        Some(u0) => {
            u0.expect(problem.mesh(), Space::P0)?;
            if !problem.is_feasible(u0) {
                return Err(Error::InvalidArgument("initial control violates the bounds".into()));
            }
            u0.clone()
        }
        None => problem.project_box(&FeFunction::zeros(*problem.mesh(), Space::P0)),
    };
    let mut ev: Evaluation = problem.evaluate(&u, None)?;
    let mut newton_iters = ev.newton_iters;
    let mut f = ev.tracking + problem.penalty(&u, alpha);
    let mut history = vec![f];
    let mut step = opts.step_init.unwrap_or(1.0 / (1.0 + alpha));
    let mut stationarity = problem.stationarity_from(&u, &ev.p_cells, alpha);
    let mut outer = 0;
    let mut converged = stationarity <= opts.tol;

    while !converged && outer < opts.max_outer {
        let target = if opts.fixed_point {
            problem.fixed_point_map(&ev.p_cells, alpha)
        } else {
            prox_step(problem, &u, &ev.p_cells, step, alpha)
        };
        let d = target.sub(&u)?;
        let predicted = ev.p_cells.inner(&d)? + problem.penalty(&target, alpha) - problem.penalty(&u, alpha);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = if t == 1.0 { target.clone() } else { u.axpy(t, &d)? };
            let s = problem.solve_state(&trial, Some(&ev.y))?;
            newton_iters += s.newton_iters;
            let ft = problem.tracking(&s.y)? + problem.penalty(&trial, alpha);
            if ft <= f + opts.armijo_c * t * predicted.min(0.0) + rounding_slack(f) {
                accepted = Some((trial, s, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((u_new, s, f_new)) = accepted else {
            log::debug!("line search stalled at alpha={alpha:e}, residual {stationarity:e}");
            break;
        };
        let ev_new = problem.complete(s)?;
        outer += 1;

        // Barzilai-Borwein estimate for the smooth part
        let du = u_new.sub(&u)?;
        let dg = ev_new.p_cells.sub(&ev.p_cells)?;
        let curvature = du.inner(&dg)?;
        let length = du.inner(&du)?;
        step = if curvature > 0.0 && length > 0.0 { length / curvature } else { 2.0 * step };
        step = step.clamp(STEP_MIN, STEP_MAX);

        u = u_new;
        ev = ev_new;
        f = f_new;
        history.push(f);
        stationarity = problem.stationarity_from(&u, &ev.p_cells, alpha);
        converged = stationarity <= opts.tol;
    }

    Ok(RegularizedSolution {
        alpha,
        u,
        y: ev.y,
        p: ev.p,
        objective_value: f,
        stationarity,
        outer_iters: outer,
        converged,
        newton_iters,
        objective_history: history,
    })
}

/// How the path is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PathMode {
    /// Sequential continuation, each α starts from the previous solution.
    #[default]
    WarmStart,
    /// Every α from the default initial point, possibly in parallel.
    Cold(Execution),
}

/// Strictly decreasing positive α values.
pub fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty alpha list".into()));
    }
    if !alphas.iter().all(|a| *a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument("alphas must be positive".into()));
    }
    if !alphas.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("alphas must be strictly decreasing".into()));
    }
    Ok(())
}

/// Solves along the α grid. A failed α is recorded and the path continues
/// from the last successful solution.
pub fn solve_path(
    problem: &ControlProblem,
    alphas: &[f64],
    opts: &OptimizerOptions,
    mode: PathMode,
) -> Result<Vec<Result<RegularizedSolution>>> {
    check_alphas(alphas)?;
    Ok(match mode {
        PathMode::WarmStart => {
            let mut out = Vec::with_capacity(alphas.len());
            let mut warm: Option<FeFunction> = None;
            for &alpha in alphas {
                let sol = solve_regularized(problem, alpha, warm.as_ref(), opts);
                if let Ok(s) = &sol {
                    warm = Some(s.u.clone());
                }
                out.push(sol);
            }
            out
        }
        PathMode::Cold(exec) => exec.map(alphas, |&alpha| solve_regularized(problem, alpha, None, opts)),
    })
}

/// `per_decade` log-spaced values from `alpha_max` down to `alpha_min` (both included
/// when the ratio is a whole number of steps).
pub fn log_grid(alpha_max: f64, alpha_min: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(alpha_max > 0.0 && alpha_min > 0.0 && alpha_max >= alpha_min && per_decade > 0) {
        return Err(Error::InvalidArgument(format!(
            "invalid grid alpha_max={alpha_max} alpha_min={alpha_min} per_decade={per_decade}"
        )));
    }
    let decades = (alpha_max / alpha_min).log10();
    let steps = (decades * per_decade as f64 + 1e-9).floor() as usize;
    let (l0, dl) = (alpha_max.log10(), 1.0 / per_decade as f64);
    Ok((0..=steps).map(|k| 10f64.powf(l0 - k as f64 * dl)).collect())
}

/// 13 values from 1e-1 to 1e-5, three per decade.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(1e-1, 1e-5, 3).expect("valid constants")
}
