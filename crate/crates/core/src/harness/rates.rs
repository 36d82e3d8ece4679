use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::{fit_loglog_slope, LogLogFit};
use crate::control::ControlProblem;
use crate::error::Result;
use crate::fem::{norm, Norm};
use crate::manufactured::ExactSolution;
use crate::optimizer::{solve_path, OptimizerOptions, PathMode, RegularizedSolution};

/// Rows whose error is below this multiple of the column floor are not fitted.
pub const FLOOR_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub optimizer: OptimizerOptions,
    pub mode: PathMode,
    /// Minimum number of cells the transition layer of `u_α` must span for a
    /// row to enter the slope fits.
    pub resolution_cells: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { optimizer: OptimizerOptions::default(), mode: PathMode::WarmStart, resolution_cells: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateColumn {
    ErrUL2,
    ErrUL1,
    ErrULinf,
    ErrYL2,
    ErrPLinf,
}

impl RateColumn {
    pub const ALL: [RateColumn; 5] = [Self::ErrUL2, Self::ErrUL1, Self::ErrULinf, Self::ErrYL2, Self::ErrPLinf];

    /// Suffix used in CSV headers and footers.
    pub fn key(&self) -> &'static str {
        match self {
            Self::ErrUL2 => "u_L2",
            Self::ErrUL1 => "u_L1",
            Self::ErrULinf => "u_Linf",
            Self::ErrYL2 => "y_L2",
            Self::ErrPLinf => "p_Linf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub alpha: f64,
    pub err_u_l2: f64,
    pub err_u_l1: f64,
    pub err_u_linf: f64,
    pub err_y_l2: f64,
    pub err_p_linf: f64,
    pub stationarity: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Converged and mesh-resolved: used by the slope fits.
    pub fit_eligible: bool,
}

impl RateRow {
    pub fn get(&self, col: RateColumn) -> f64 {
        match col {
            RateColumn::ErrUL2 => self.err_u_l2,
            RateColumn::ErrUL1 => self.err_u_l1,
            RateColumn::ErrULinf => self.err_u_linf,
            RateColumn::ErrYL2 => self.err_y_l2,
            RateColumn::ErrPLinf => self.err_p_linf,
        }
    }

    fn from_solution(s: &RegularizedSolution, exact: &ExactSolution) -> Result<Self> {
        Ok(Self {
            alpha: s.alpha,
            err_u_l2: exact.u_bar_exact.distance(&s.u, Norm::L2),
            err_u_l1: exact.u_bar_exact.distance(&s.u, Norm::L1),
            err_u_linf: exact.u_bar_exact.distance(&s.u, Norm::Linf),
            err_y_l2: norm(&s.y.sub(&exact.y_bar)?, Norm::L2, None),
            err_p_linf: s.p.sub(&exact.p_bar)?.max_abs(),
            stationarity: s.stationarity,
            outer_iters: s.outer_iters,
            converged: s.converged,
            fit_eligible: false,
        })
    }

    fn failed(alpha: f64) -> Self {
        Self {
            alpha,
            err_u_l2: f64::NAN,
            err_u_l1: f64::NAN,
            err_u_linf: f64::NAN,
            err_y_l2: f64::NAN,
            err_p_linf: f64::NAN,
            stationarity: f64::NAN,
            outer_iters: 0,
            converged: false,
            fit_eligible: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub slopes: Vec<(RateColumn, Option<LogLogFit>)>,
    pub kappa: f64,
    /// `min(κ, 1)`.
    pub d: f64,
    /// Smallest α whose transition layer is resolved by the mesh.
    pub alpha_resolved: f64,
    /// Per-column error at the smallest converged α.
    pub floors: Vec<(RateColumn, f64)>,
    /// Free-form `key=value` notes appended to the CSV footer.
    pub notes: Vec<String>,
}

pub const RATES_HEADER: &str = "alpha,err_u_L2,err_u_L1,err_u_Linf,err_y_L2,err_p_Linf,stationarity,outer_iters,converged";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl RateTable {
    pub fn slope(&self, col: RateColumn) -> Option<&LogLogFit> {
        self.slopes.iter().find(|(c, _)| *c == col).and_then(|(_, f)| f.as_ref())
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    /// Header, one line per row, then `# key=value` footer lines.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(RATES_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.alpha),
                fmt_f64(r.err_u_l2),
                fmt_f64(r.err_u_l1),
                fmt_f64(r.err_u_linf),
                fmt_f64(r.err_y_l2),
                fmt_f64(r.err_p_linf),
                fmt_f64(r.stationarity),
                r.outer_iters.to_string(),
                r.converged.to_string(),
            ])?;
        }
        let mut out = w.into_inner().map_err(|e| e.into_error())?;
        for (col, fit) in &self.slopes {
            match fit {
                Some(f) => {
                    writeln!(out, "# slope_{}={}", col.key(), fmt_f64(f.slope))?;
                    writeln!(out, "# r2_{}={}", col.key(), fmt_f64(f.r2))?;
                    writeln!(out, "# points_{}={}", col.key(), f.points)?;
                }
                None => writeln!(out, "# slope_{}=undefined", col.key())?,
            }
        }
        writeln!(out, "# kappa={}", fmt_f64(self.kappa))?;
        writeln!(out, "# d={}", fmt_f64(self.d))?;
        writeln!(out, "# alpha_resolved={}", fmt_f64(self.alpha_resolved))?;
        for (col, floor) in &self.floors {
            writeln!(out, "# floor_{}={}", col.key(), fmt_f64(*floor))?;
        }
        writeln!(out, "# fit_rows={}", self.rows.iter().filter(|r| r.fit_eligible).count())?;
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        Ok(())
    }
}

/// Solves along `alphas` and tabulates the errors against the exact solution.
///
/// Slopes are fitted only over converged rows with `α ≥ alpha_resolved`, where
/// the transition layer `{|p| < α}` (width `2α/|p̄'|` at each switching point)
/// spans at least `resolution_cells` cells. Below that the P0 control snaps to
/// the bang-bang values and the error reflects the mesh, not α.
///
/// Each column additionally drops rows within `FLOOR_FACTOR` of its
/// discretization floor, estimated by the error at the smallest converged α.
pub fn rate_sweep(
    problem: &ControlProblem,
    exact: &ExactSolution,
    alphas: &[f64],
    opts: &SweepOptions,
) -> Result<RateTable> {
    let path = solve_path(problem, alphas, &opts.optimizer, opts.mode)?;
    let alpha_resolved = 0.5 * opts.resolution_cells * problem.mesh().h() * exact.switching_slope;
    let mut rows = Vec::with_capacity(path.len());
    for (alpha, sol) in alphas.iter().zip(&path) {
        let mut row = match sol {
            Ok(s) => RateRow::from_solution(s, exact)?,
            Err(e) => {
                log::warn!("alpha={alpha:e} failed: {e}");
                RateRow::failed(*alpha)
            }
        };
        row.fit_eligible = row.converged && row.alpha >= alpha_resolved;
        rows.push(row);
    }
    let smallest = rows.iter().filter(|r| r.converged).min_by(|a, b| a.alpha.total_cmp(&b.alpha)).copied();
    let floors: Vec<(RateColumn, f64)> =
        RateColumn::ALL.iter().map(|&c| (c, smallest.map_or(0.0, |r| r.get(c)))).collect();
    let slopes = floors
        .iter()
        .map(|&(col, floor)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.fit_eligible && r.get(col) > 0.0 && r.get(col) >= FLOOR_FACTOR * floor)
                .map(|r| (r.alpha, r.get(col)))
                .unzip();
            (col, fit_loglog_slope(&xs, &ys).ok())
        })
        .collect();
    Ok(RateTable { rows, slopes, kappa: exact.kappa, d: exact.kappa.min(1.0), alpha_resolved, floors, notes: Vec::new() })
}
