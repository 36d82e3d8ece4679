//! Damped Newton solver for `-(a y')' + f(y) = rhs`, `y = 0` on the boundary,
//! together with the linearized and adjoint problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_reaction, assemble_stiffness, assemble_weighted_stiffness, control_load, density_load, nonlinear_load,
    FeFunction, Mesh, Space, TridiagonalMatrix,
};
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Absolute tolerance on the L∞ norm of the discrete residual.
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    /// Use `max(f'(y), 0)` in the Newton matrix (safeguard for non-monotone `f`).
    pub clamp_reaction: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 50, max_halvings: 30, clamp_reaction: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSolution {
    pub y: FeFunction,
    pub newton_iters: usize,
    pub final_residual: f64,
    /// Tolerance actually enforced: the requested one, raised to the rounding
    /// floor of the residual evaluation on very fine meshes.
    pub tolerance: f64,
    pub history: Vec<f64>,
}

/// Right-hand side of a linearized solve.
#[derive(Debug, Clone, Copy)]
pub enum Load<'a> {
    /// P0 source `v`, load `∫ v φ_i`.
    Control(&'a FeFunction),
    /// P1 density `v`, load `∫ v φ_i`.
    Density(&'a FeFunction),
}

/// The elliptic operator together with its semilinear term.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEquation {
    mesh: Mesh,
    nl: Nonlinearity,
    diffusion: Option<Vec<f64>>,
    stiffness: TridiagonalMatrix,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

impl StateEquation {
    pub fn new(mesh: Mesh, nl: Nonlinearity) -> Self {
        Self { mesh, nl, diffusion: None, stiffness: assemble_stiffness(&mesh) }
    }

    /// Cellwise diffusion coefficient `a(x)`, bounded below by a positive constant.
    pub fn with_diffusion(mut self, coeff: Vec<f64>) -> Result<Self> {
        if coeff.len() != self.mesh.n_cells() {
            return Err(Error::Mismatch(format!("{} diffusion values for {} cells", coeff.len(), self.mesh.n_cells())));
        }
        if !coeff.iter().all(|&a| a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument("diffusion coefficient must be positive".into()));
        }
        self.stiffness = assemble_weighted_stiffness(&self.mesh, &coeff);
        self.diffusion = Some(coeff);
        Ok(self)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn diffusion(&self) -> Option<&[f64]> {
        self.diffusion.as_deref()
    }

    pub fn stiffness(&self) -> &TridiagonalMatrix {
        &self.stiffness
    }

    fn interior(y: &FeFunction) -> &[f64] {
        let v = y.values();
        &v[1..v.len() - 1]
    }

    fn extend_by_zero(&self, x: Vec<f64>) -> FeFunction {
        let mut values = Vec::with_capacity(self.mesh.n_nodes());
        values.push(0.0);
        values.extend(x);
        values.push(0.0);
        FeFunction::new(self.mesh, Space::P1, values).expect("interior length matches mesh")
    }

    /// Discrete residual `K y + N(y) - load` on the interior nodes.
    pub fn residual(&self, y: &FeFunction, load: &[f64]) -> Vec<f64> {
        let ky = self.stiffness.apply(Self::interior(y));
        let nonlinear = if self.nl.is_zero() { None } else { Some(nonlinear_load(&self.mesh, y, |s| self.nl.eval(s))) };
        ky.iter()
            .enumerate()
            .map(|(i, k)| k + nonlinear.as_ref().map_or(0.0, |n| n[i]) - load[i])
            .collect()
    }

    /// `K + R(y)` with `R_ij = ∫ f'(y) φ_i φ_j`.
    pub fn linearized_matrix(&self, y: &FeFunction, clamp: bool) -> TridiagonalMatrix {
        if self.nl.is_zero() {
            return self.stiffness.clone();
        }
        let reaction = if clamp {
            assemble_reaction(&self.mesh, y, |s| self.nl.deriv(s).max(0.0))
        } else {
            assemble_reaction(&self.mesh, y, |s| self.nl.deriv(s))
        };
        self.stiffness.add(&reaction)
    }

    fn rounding_floor(&self, y: &FeFunction, load: &[f64]) -> f64 {
        let kmax = self.stiffness.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        16.0 * f64::EPSILON * (2.0 * kmax * y.max_abs() + inf_norm(load))
    }

    /// Solves the state equation with source `rhs` (P0).
    pub fn solve_state(&self, rhs: &FeFunction, y_init: Option<&FeFunction>, opts: &NewtonOptions) -> Result<StateSolution> {
        rhs.expect(&self.mesh, Space::P0)?;
        let load = control_load(rhs);
        let mut y = match y_init {
            Some(y0) => {
                y0.expect(&self.mesh, Space::P1)?;
                let mut y = y0.clone();
                let n = self.mesh.n_cells();
                y.values_mut()[0] = 0.0;
                y.values_mut()[n] = 0.0;
                y
            }
            None => FeFunction::zeros(self.mesh, Space::P1),
        };
        let mut r = self.residual(&y, &load);
        let mut history = Vec::new();
        let mut polished = false;
        for iter in 0..=opts.max_iters {
            let rn = inf_norm(&r);
            if !rn.is_finite() {
                return Err(Error::BlowUp { iter });
            }
            history.push(rn);
            let tolerance = opts.tol.max(self.rounding_floor(&y, &load));
            let converged = rn <= tolerance;
            if converged && (polished || self.nl.is_zero() && iter > 0) {
                return Ok(StateSolution { y, newton_iters: iter, final_residual: rn, tolerance, history });
            }
            if iter == opts.max_iters {
                if converged {
                    return Ok(StateSolution { y, newton_iters: iter, final_residual: rn, tolerance, history });
                }
                break;
            }
            let jac = self.linearized_matrix(&y, opts.clamp_reaction);
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let step = jac.solve(&neg_r)?;
            if converged {
                // one extra step to drive the residual to rounding level; kept only if it helps
                let trial = self.shifted(&y, &step, 1.0);
                let rt = self.residual(&trial, &load);
                if inf_norm(&rt) <= rn {
                    y = trial;
                    r = rt;
                }
                polished = true;
                continue;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let trial = self.shifted(&y, &step, t);
                let rt = self.residual(&trial, &load);
                let rtn = inf_norm(&rt);
                if rtn.is_finite() && rtn < rn {
                    y = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                if step.iter().any(|s| !s.is_finite()) {
                    return Err(Error::BlowUp { iter });
                }
                break;
            }
        }
        Err(Error::NonConvergence { iters: history.len().saturating_sub(1), history })
    }

    fn shifted(&self, y: &FeFunction, step: &[f64], t: f64) -> FeFunction {
        let mut out = y.clone();
        let v = out.values_mut();
        for (i, s) in step.iter().enumerate() {
            v[i + 1] += t * s;
        }
        out
    }

    /// Solves `(K + R(y)) z = load`.
    pub fn solve_linearized(&self, y: &FeFunction, load: Load<'_>) -> Result<FeFunction> {
        y.expect(&self.mesh, Space::P1)?;
        let rhs = match load {
            Load::Control(v) => {
                v.expect(&self.mesh, Space::P0)?;
                control_load(v)
            }
            Load::Density(v) => {
                v.expect(&self.mesh, Space::P1)?;
                density_load(v)
            }
        };
        let z = self.linearized_matrix(y, false).solve(&rhs)?;
        Ok(self.extend_by_zero(z))
    }

    /// Adjoint state for the tracking term: load `y - y_d`.
    pub fn solve_adjoint(&self, y: &FeFunction, y_d: &FeFunction) -> Result<FeFunction> {
        let misfit = y.sub(y_d)?;
        self.solve_linearized(y, Load::Density(&misfit))
    }
}
