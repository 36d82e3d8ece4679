//! Convergence-rate sweeps, level-set measure sweeps and derivative checks.

pub(crate) mod asc;
mod checks;
mod fit;
mod rates;

pub use asc::{asc_sweep, default_epsilons, AscReport};
pub use checks::{
    best_per_direction, directional_check, gradient_check, gradient_check_random, growth_check, random_feasible, smooth_objective,
    sosc_sample, write_gradient_csv, GradientCheckRow, GrowthReport, SoscReport,
};
pub use fit::{fit_loglog_slope, LogLogFit};
pub use rates::{rate_sweep, RateColumn, RateRow, RateTable, SweepOptions};
