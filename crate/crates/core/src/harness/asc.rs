use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::fit_loglog_slope;
use super::rates::fmt_f64;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::{band_measure, FeFunction, Space};

/// Measures of `{0 < ||p| − β| < ε}` and the fitted power law `c εᵏ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AscReport {
    pub beta: f64,
    pub rows: Vec<(f64, f64)>,
    /// `None` when fewer than three rows have positive measure.
    pub kappa_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub r2: Option<f64>,
}

/// 20 log-spaced values in `[1e-3, 0.3]`.
pub fn default_epsilons() -> Vec<f64> {
    log_spaced(1e-3, 0.3, 20)
}

pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Length of cells on which `|p| == level` identically.
fn flat_level_measure(p: &FeFunction, level: f64) -> f64 {
    let v = p.values();
    let h = p.mesh().h();
    (0..p.mesh().n_cells()).filter(|&k| v[k].abs() == level && v[k + 1].abs() == level && v[k] * v[k + 1] >= 0.0).count()
        as f64
        * h
}

pub fn asc_sweep(p: &FeFunction, beta: f64, epsilons: &[f64], exec: Execution) -> Result<AscReport> {
    p.expect(p.mesh(), Space::P1)?;
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("level must be >= 0, got {beta}")));
    }
    if epsilons.is_empty() || !epsilons.iter().all(|e| *e > 0.0) || !epsilons.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("epsilons must be positive and strictly increasing".into()));
    }
    let flat = if beta > 0.0 { flat_level_measure(p, beta) } else { 0.0 };
    let measures = exec.map(epsilons, |&eps| {
        if beta == 0.0 {
            band_measure(p, 0.0, eps)
        } else {
            (band_measure(p, beta - eps, beta + eps) - flat).max(0.0)
        }
    });
    let rows: Vec<(f64, f64)> = epsilons.iter().copied().zip(measures).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|(_, m)| *m > 0.0).copied().unzip();
    let fit = fit_loglog_slope(&xs, &ys).ok();
    Ok(AscReport {
        beta,
        rows,
        kappa_hat: fit.map(|f| f.slope),
        c_hat: fit.map(|f| f.intercept.exp()),
        r2: fit.map(|f| f.r2),
    })
}

impl AscReport {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["epsilon", "measure"])?;
        for (e, m) in &self.rows {
            w.write_record([fmt_f64(*e), fmt_f64(*m)])?;
        }
        let mut out = w.into_inner().map_err(|e| e.into_error())?;
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_owned(), fmt_f64);
        writeln!(out, "# beta={}", fmt_f64(self.beta))?;
        writeln!(out, "# kappa_hat={}", opt(self.kappa_hat))?;
        writeln!(out, "# c_hat={}", opt(self.c_hat))?;
        writeln!(out, "# r2={}", opt(self.r2))?;
        Ok(())
    }
}
