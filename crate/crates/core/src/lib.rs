//! Tikhonov regularization of bang-bang optimal control problems governed by a
//! 1D semilinear elliptic equation
//!
//! ```text
//! min ½‖y − y_d‖² + β‖u‖₁ + α/2 ‖u‖²   s.t.  −y'' + f(y) = u + e,  y(0) = y(1) = 0,  u_a ≤ u ≤ u_b
//! ```
//!
//! States and adjoints are P1 finite element functions, controls are cellwise
//! constant. [`optimizer`] solves one regularized problem by proximal gradient
//! steps and traces the path `α ↘ 0`; [`manufactured`] builds benchmark problems
//! with known bang-bang solutions and [`harness`] measures convergence rates
//! against them.

pub mod cli;
pub mod control;
pub mod error;
pub mod exec;
pub mod fem;
pub mod harness;
pub mod manufactured;
pub mod nonlinearity;
pub mod optimizer;
pub mod pde;

pub use control::{soft_threshold, ControlProblem, Evaluation};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fem::{band_measure, norm, FeFunction, Interval, Mesh, Norm, PiecewiseConstant, Space};
pub use manufactured::{build_section7, build_sparse, ExactSolution, NamedProblem};
pub use nonlinearity::{make_nonlinearity, Nonlinearity, NonlinearityKind};
pub use optimizer::{solve_path, solve_regularized, OptimizerOptions, PathMode, RegularizedSolution};
pub use pde::{Load, NewtonOptions, StateEquation, StateSolution};
