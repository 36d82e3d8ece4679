//! Control problem definition, reduced objective, adjoint gradient, box
//! projection, soft thresholding and the second-order quadratic form.

use crate::error::{Error, Result};
use crate::fem::{cell_average, norm, FeFunction, Norm, Space, GAUSS_2};
use crate::fem::Mesh;
use crate::pde::{Load, NewtonOptions, StateEquation, StateSolution};

/// `min ½‖y_u − y_d‖² + β‖u‖₁ (+ α/2 ‖u‖²)` subject to the state equation
/// with source `u + e_shift` and `u_lo ≤ u ≤ u_hi`.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    state: StateEquation,
    y_d: FeFunction,
    e_shift: FeFunction,
    u_lo: FeFunction,
    u_hi: FeFunction,
    beta: f64,
    newton: NewtonOptions,
}

/// State, adjoint and reduced gradient at one control.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub y: FeFunction,
    pub p: FeFunction,
    /// Cell averages of `p`: the Riesz representative of `J'(u)` in P0.
    pub p_cells: FeFunction,
    /// `½‖y − y_d‖²`.
    pub tracking: f64,
    pub newton_iters: usize,
}

impl ControlProblem {
    pub fn new(
        state: StateEquation,
        y_d: FeFunction,
        e_shift: FeFunction,
        u_lo: FeFunction,
        u_hi: FeFunction,
        beta: f64,
    ) -> Result<Self> {
        let mesh = *state.mesh();
        y_d.expect(&mesh, Space::P1)?;
        for f in [&e_shift, &u_lo, &u_hi] {
            f.expect(&mesh, Space::P0)?;
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("sparsity weight must be >= 0, got {beta}")));
        }
        for (k, (lo, hi)) in u_lo.values().iter().zip(u_hi.values()).enumerate() {
            if !(lo <= hi) {
                return Err(Error::InvalidArgument(format!("u_lo > u_hi in cell {k}")));
            }
            if beta > 0.0 && !(*lo <= 0.0 && 0.0 <= *hi) {
                return Err(Error::InvalidArgument(format!("sparse problems need u_lo <= 0 <= u_hi (cell {k})")));
            }
        }
        Ok(Self { state, y_d, e_shift, u_lo, u_hi, beta, newton: NewtonOptions::default() })
    }

    /// Constant bounds, no source shift.
    pub fn with_constant_bounds(state: StateEquation, y_d: FeFunction, lo: f64, hi: f64, beta: f64) -> Result<Self> {
        let mesh = *state.mesh();
        Self::new(
            state,
            y_d,
            FeFunction::zeros(mesh, Space::P0),
            FeFunction::constant(mesh, Space::P0, lo),
            FeFunction::constant(mesh, Space::P0, hi),
            beta,
        )
    }

    pub fn with_newton(mut self, newton: NewtonOptions) -> Self {
        self.newton = newton;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        self.state.mesh()
    }

    pub fn state_equation(&self) -> &StateEquation {
        &self.state
    }

    pub fn y_d(&self) -> &FeFunction {
        &self.y_d
    }

    pub fn e_shift(&self) -> &FeFunction {
        &self.e_shift
    }

    pub fn bounds(&self) -> (&FeFunction, &FeFunction) {
        (&self.u_lo, &self.u_hi)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn newton_options(&self) -> &NewtonOptions {
        &self.newton
    }

    fn check_control(&self, u: &FeFunction) -> Result<()> {
        u.expect(self.mesh(), Space::P0)
    }

    pub fn solve_state(&self, u: &FeFunction, y_init: Option<&FeFunction>) -> Result<StateSolution> {
        self.check_control(u)?;
        let rhs = u.add(&self.e_shift)?;
        self.state.solve_state(&rhs, y_init, &self.newton)
    }

    /// `½‖y − y_d‖²`, exact for P1 functions.
    pub fn tracking(&self, y: &FeFunction) -> Result<f64> {
        let e = y.sub(&self.y_d)?;
        Ok(0.5 * e.inner(&e)?)
    }

    /// `β‖u‖₁ + α/2 ‖u‖²`.
    pub fn penalty(&self, u: &FeFunction, alpha: f64) -> f64 {
        let h = self.mesh().h();
        u.values().iter().map(|v| h * (self.beta * v.abs() + 0.5 * alpha * v * v)).sum()
    }

    pub fn objective(&self, u: &FeFunction, alpha: f64) -> Result<f64> {
        let s = self.solve_state(u, None)?;
        Ok(self.tracking(&s.y)? + self.penalty(u, alpha))
    }

    /// State and adjoint solves at `u`.
    pub fn evaluate(&self, u: &FeFunction, y_init: Option<&FeFunction>) -> Result<Evaluation> {
        let s = self.solve_state(u, y_init)?;
        self.complete(s)
    }

    /// Adds the adjoint solve to an already computed state.
    pub fn complete(&self, s: StateSolution) -> Result<Evaluation> {
        let p = self.state.solve_adjoint(&s.y, &self.y_d)?;
        let p_cells = cell_average(&p);
        let tracking = self.tracking(&s.y)?;
        Ok(Evaluation { y: s.y, p, p_cells, tracking, newton_iters: s.newton_iters })
    }

    /// Riesz representative of the smooth part `J'(u) + α u` in the P0 space.
    pub fn gradient_smooth(&self, u: &FeFunction, alpha: f64) -> Result<FeFunction> {
        let ev = self.evaluate(u, None)?;
        ev.p_cells.axpy(alpha, u)
    }

    /// Cellwise clamp to `[u_lo, u_hi]`.
    pub fn project_box(&self, u: &FeFunction) -> FeFunction {
        let mut out = u.clone();
        for ((v, lo), hi) in out.values_mut().iter_mut().zip(self.u_lo.values()).zip(self.u_hi.values()) {
            *v = v.clamp(*lo, *hi);
        }
        out
    }

    pub fn is_feasible(&self, u: &FeFunction) -> bool {
        u.values()
            .iter()
            .zip(self.u_lo.values().iter().zip(self.u_hi.values()))
            .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// `P_box(−soft_β(p_cells) / α)`.
    pub fn fixed_point_map(&self, p_cells: &FeFunction, alpha: f64) -> FeFunction {
        let shrunk = soft_threshold(p_cells, self.beta);
        self.project_box(&shrunk.scale(-1.0 / alpha))
    }

    pub fn stationarity_from(&self, u: &FeFunction, p_cells: &FeFunction, alpha: f64) -> f64 {
        let target = self.fixed_point_map(p_cells, alpha);
        u.values().iter().zip(target.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `‖u − P_box(−soft_β(p_u)/α)‖_∞`; zero exactly at stationary points.
    pub fn stationarity_residual(&self, u: &FeFunction, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let ev = self.evaluate(u, None)?;
        Ok(self.stationarity_from(u, &ev.p_cells, alpha))
    }

    /// `∫ (1 − f''(y_u) p_u) z_v²` with `z_v` the linearized state in direction `v`.
    pub fn hessian_quadratic_form(&self, u: &FeFunction, v: &FeFunction) -> Result<f64> {
        self.check_control(v)?;
        let ev = self.evaluate(u, None)?;
        self.hessian_at(&ev, v)
    }

    /// Same as [`hessian_quadratic_form`](Self::hessian_quadratic_form) reusing an evaluation.
    pub fn hessian_at(&self, ev: &Evaluation, v: &FeFunction) -> Result<f64> {
        let z = self.state.solve_linearized(&ev.y, Load::Control(v))?;
        let nl = self.state.nonlinearity();
        let h = self.mesh().h();
        let (yv, pv, zv) = (ev.y.values(), ev.p.values(), z.values());
        let mut total = 0.0;
        for k in 0..self.mesh().n_cells() {
            for &(xi, w) in GAUSS_2.iter() {
                let at = |f: &[f64]| (1.0 - xi) * f[k] + xi * f[k + 1];
                let zg = at(zv);
                total += h * w * (1.0 - nl.deriv2(at(yv)) * at(pv)) * zg * zg;
            }
        }
        Ok(total)
    }

    /// `‖z_v‖²` for the linearized state at `ev`.
    pub fn linearized_norm_sq(&self, ev: &Evaluation, v: &FeFunction) -> Result<f64> {
        let z = self.state.solve_linearized(&ev.y, Load::Control(v))?;
        Ok(norm(&z, Norm::L2, None).powi(2))
    }
}

/// `sign(p) · max(|p| − β, 0)`, pointwise on the coefficients.
pub fn soft_threshold(p: &FeFunction, beta: f64) -> FeFunction {
    if beta == 0.0 {
        return p.clone();
    }
    p.map(|v| shrink(v, beta))
}

#[inline]
pub(crate) fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}
