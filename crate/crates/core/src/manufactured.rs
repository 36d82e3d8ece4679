//! Benchmark problems with known optimal triples `(ū, ȳ, p̄)`.
//!
//! With `p̄ = sin(2πx)`, `ȳ = sin(πx)` the source shift and the desired state
//! are chosen so that the state and adjoint equations hold exactly:
//!
//! ```text
//! e   = −ū − ȳ'' + f(ȳ)
//! y_d = ȳ + p̄'' − f'(ȳ) p̄
//! ```
//!
//! For `β = 0` the control is bang-bang, `ū = −sgn(p̄)`. The sparse variant uses
//! the soft-threshold relation instead and is bang-bang-off.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::ControlProblem;
use crate::error::{Error, Result};
use crate::fem::{FeFunction, Interval, Mesh, PiecewiseConstant, Space};
use crate::nonlinearity::{Nonlinearity, NonlinearityKind};
use crate::pde::StateEquation;

#[derive(Debug, Clone)]
pub struct ExactSolution {
    /// Midpoint samples of the exact control.
    pub u_bar: FeFunction,
    /// The exact control with its true switching points.
    pub u_bar_exact: PiecewiseConstant,
    pub y_bar: FeFunction,
    pub p_bar: FeFunction,
    /// Exponent of the level-set growth condition around the switching level.
    pub kappa: f64,
    pub active_set: Vec<Interval>,
    /// Largest `|p̄'|` at a switching point.
    pub switching_slope: f64,
    /// Switching level of `|p̄|` (0 for bang-bang, β for bang-bang-off).
    pub level: f64,
}

pub fn p_bar(x: f64) -> f64 {
    (2.0 * PI * x).sin()
}

pub fn y_bar(x: f64) -> f64 {
    (PI * x).sin()
}

fn lap_y_bar(x: f64) -> f64 {
    -PI * PI * (PI * x).sin()
}

fn lap_p_bar(x: f64) -> f64 {
    -4.0 * PI * PI * (2.0 * PI * x).sin()
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `ū = −sgn(p̄)`.
pub fn u_bar_bang_bang(x: f64) -> f64 {
    -sgn(p_bar(x))
}

/// Soft-threshold relation with bounds ±1: `−1` where `p̄ > β`, `0` where `|p̄| < β`, `1` where `p̄ < −β`.
pub fn u_bar_sparse(x: f64, beta: f64) -> f64 {
    let p = p_bar(x);
    if p > beta {
        -1.0
    } else if p < -beta {
        1.0
    } else {
        0.0
    }
}

pub fn e_shift(nl: &Nonlinearity, u: f64, x: f64) -> f64 {
    -u - lap_y_bar(x) + nl.eval(y_bar(x))
}

pub fn desired_state(nl: &Nonlinearity, x: f64) -> f64 {
    y_bar(x) + lap_p_bar(x) - nl.deriv(y_bar(x)) * p_bar(x)
}

fn assemble(mesh: Mesh, nl: Nonlinearity, u: impl Fn(f64) -> f64, beta: f64) -> Result<(ControlProblem, FeFunction)> {
    let u_bar = FeFunction::sample_p0(mesh, &u);
    let e = FeFunction::new(
        mesh,
        Space::P0,
        mesh.midpoints().zip(u_bar.values()).map(|(x, &ub)| e_shift(&nl, ub, x)).collect(),
    )?;
    let y_d = FeFunction::interpolate_p1(mesh, |x| desired_state(&nl, x));
    let problem = ControlProblem::new(
        StateEquation::new(mesh, nl),
        y_d,
        e,
        FeFunction::constant(mesh, Space::P0, -1.0),
        FeFunction::constant(mesh, Space::P0, 1.0),
        beta,
    )?;
    Ok((problem, u_bar))
}

/// Bang-bang benchmark on `(0, 1)` with bounds `−1 ≤ u ≤ 1`.
pub fn build_section7(kind: NonlinearityKind, n_cells: usize) -> Result<(ControlProblem, ExactSolution)> {
    let mesh = Mesh::unit(n_cells)?;
    let (problem, u_bar) = assemble(mesh, Nonlinearity::new(kind), u_bar_bang_bang, 0.0)?;
    let exact = ExactSolution {
        u_bar,
        u_bar_exact: PiecewiseConstant::new(vec![0.0, 0.5, 1.0], vec![-1.0, 1.0]),
        y_bar: FeFunction::interpolate_p1_dirichlet(mesh, y_bar),
        p_bar: FeFunction::interpolate_p1_dirichlet(mesh, p_bar),
        kappa: 1.0,
        active_set: vec![Interval::new(0.0, 1.0)],
        switching_slope: 2.0 * PI,
        level: 0.0,
    };
    Ok((problem, exact))
}

/// Sparse (bang-bang-off) variant with weight `β ∈ (0, 1)`.
pub fn build_sparse(kind: NonlinearityKind, beta: f64, n_cells: usize) -> Result<(ControlProblem, ExactSolution)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("sparsity weight must lie in (0, 1), got {beta}")));
    }
    let mesh = Mesh::unit(n_cells)?;
    let (problem, u_bar) = assemble(mesh, Nonlinearity::new(kind), |x| u_bar_sparse(x, beta), beta)?;
    let s = beta.asin() / (2.0 * PI);
    let exact = ExactSolution {
        u_bar,
        u_bar_exact: PiecewiseConstant::new(
            vec![0.0, s, 0.5 - s, 0.5 + s, 1.0 - s, 1.0],
            vec![0.0, -1.0, 0.0, 1.0, 0.0],
        ),
        y_bar: FeFunction::interpolate_p1_dirichlet(mesh, y_bar),
        p_bar: FeFunction::interpolate_p1_dirichlet(mesh, p_bar),
        kappa: 1.0,
        active_set: vec![Interval::new(0.0, 1.0)],
        switching_slope: 2.0 * PI * (1.0 - beta * beta).sqrt(),
        level: beta,
    };
    Ok((problem, exact))
}

/// Problem names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedProblem {
    Section7(NonlinearityKind),
    Sparse(NonlinearityKind),
}

impl NamedProblem {
    pub fn build(&self, n_cells: usize, beta: Option<f64>) -> Result<(ControlProblem, ExactSolution)> {
        match self {
            Self::Section7(kind) => {
                if beta.is_some_and(|b| b != 0.0) {
                    return Err(Error::InvalidArgument(format!("{self} has no sparsity term; use sparse-{kind}")));
                }
                build_section7(*kind, n_cells)
            }
            Self::Sparse(kind) => build_sparse(*kind, beta.unwrap_or(0.5), n_cells),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse(_))
    }
}

impl fmt::Display for NamedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Section7(k) => write!(f, "section7-{k}"),
            Self::Sparse(k) => write!(f, "sparse-{k}"),
        }
    }
}

impl FromStr for NamedProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownProblem(s.to_owned());
        let (family, kind) = s.split_once('-').ok_or_else(unknown)?;
        let kind: NonlinearityKind = kind.parse().map_err(|_| unknown())?;
        match family {
            "section7" => Ok(Self::Section7(kind)),
            "sparse" => Ok(Self::Sparse(kind)),
            _ => Err(unknown()),
        }
    }
}
