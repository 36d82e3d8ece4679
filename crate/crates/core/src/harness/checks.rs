use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rates::fmt_f64;
use crate::control::ControlProblem;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::{cell_average, FeFunction, Space};
use crate::manufactured::ExactSolution;

/// `J(u) + α/2 ‖u‖²` without the L1 term.
pub fn smooth_objective(problem: &ControlProblem, u: &FeFunction, alpha: f64) -> Result<f64> {
    let y = problem.solve_state(u, None)?.y;
    Ok(problem.tracking(&y)? + 0.5 * alpha * u.inner(u)?)
}

/// Uniformly distributed control within the bounds.
pub fn random_feasible(problem: &ControlProblem, rng: &mut impl Rng) -> FeFunction {
    let (lo, hi) = problem.bounds();
    let values = lo.values().iter().zip(hi.values()).map(|(&l, &h)| if l < h { rng.gen_range(l..=h) } else { l }).collect();
    FeFunction::new(*problem.mesh(), Space::P0, values).expect("same mesh")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckRow {
    pub point: usize,
    pub direction: usize,
    pub h: f64,
    /// `|fd − ⟨∇, v⟩| / |⟨∇, v⟩|` with central differences of step `h`.
    pub rel_error: f64,
}

/// Central-difference check of the adjoint gradient in direction `v`.
pub fn directional_check(problem: &ControlProblem, u: &FeFunction, v: &FeFunction, alpha: f64, h_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    v.expect(problem.mesh(), Space::P0)?;
    if v.max_abs() == 0.0 {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    let grad = problem.gradient_smooth(u, alpha)?;
    let exact = grad.inner(v)?;
    h_list
        .iter()
        .map(|&h| {
            let fp = smooth_objective(problem, &u.axpy(h, v)?, alpha)?;
            let fm = smooth_objective(problem, &u.axpy(-h, v)?, alpha)?;
            let fd = (fp - fm) / (2.0 * h);
            Ok((h, (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)))
        })
        .collect()
}

/// Checks `n_directions` random directions at `u`.
pub fn gradient_check(
    problem: &ControlProblem,
    u: &FeFunction,
    alpha: f64,
    n_directions: usize,
    h_list: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<Vec<GradientCheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<FeFunction> =
        (0..n_directions).map(|_| FeFunction::sample_p0(*problem.mesh(), |_| rng.gen_range(-1.0..1.0))).collect();
    let indexed: Vec<(usize, &FeFunction)> = dirs.iter().enumerate().collect();
    let per_dir = exec.map(&indexed, |(j, v)| directional_check(problem, u, v, alpha, h_list).map(|r| (*j, r)));
    let mut rows = Vec::new();
    for res in per_dir {
        let (j, r) = res?;
        rows.extend(r.into_iter().map(|(h, rel_error)| GradientCheckRow { point: 0, direction: j, h, rel_error }));
    }
    Ok(rows)
}

/// Gradient check at `n_points` random feasible controls.
pub fn gradient_check_random(
    problem: &ControlProblem,
    alpha: f64,
    n_points: usize,
    n_directions: usize,
    h_list: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<Vec<GradientCheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for i in 0..n_points {
        let u = random_feasible(problem, &mut rng);
        let dir_seed: u64 = rng.gen();
        for mut r in gradient_check(problem, &u, alpha, n_directions, h_list, dir_seed, exec)? {
            r.point = i;
            rows.push(r);
        }
    }
    Ok(rows)
}

pub fn write_gradient_csv<W: Write>(rows: &[GradientCheckRow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["point", "direction", "h", "rel_error"])?;
    for r in rows {
        w.write_record([r.point.to_string(), r.direction.to_string(), fmt_f64(r.h), fmt_f64(r.rel_error)])?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    let worst_best = best_per_direction(rows).into_iter().fold(0.0_f64, f64::max);
    writeln!(out, "# max_min_rel_error={}", fmt_f64(worst_best))?;
    Ok(())
}

/// Smallest relative error over the h-sweep for each (point, direction).
pub fn best_per_direction(rows: &[GradientCheckRow]) -> Vec<f64> {
    let mut keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.point, r.direction)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.iter()
        .map(|&(p, d)| {
            rows.iter().filter(|r| r.point == p && r.direction == d).map(|r| r.rel_error).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Geometric-mean estimate of `c` in `lhs ≈ c ‖u − ū‖_{L1}^{1+1/κ}`.
    pub c_hat: f64,
    /// Minimum of `lhs / ‖u − ū‖_{L1}^{1+1/κ}` over the samples.
    pub min_ratio: f64,
    pub samples_used: usize,
}

/// Samples `J'(ū)(u − ū) + β j'(ū; u − ū)` against `‖u − ū‖_{L1}^{1+1/κ}`.
///
/// Each sample replaces `ū` by uniform random values on a random window of
/// random width, so both global and localized perturbations are probed.
/// Samples with `u = ū` are skipped.
pub fn growth_check(problem: &ControlProblem, exact: &ExactSolution, n_samples: usize, seed: u64) -> Result<GrowthReport> {
    let ubar = &exact.u_bar;
    let ev = problem.evaluate(ubar, None)?;
    let p = ev.p_cells.values();
    let mesh = *problem.mesh();
    let h = mesh.h();
    let beta = problem.beta();
    let exponent = 1.0 + 1.0 / exact.kappa;
    let (lo, hi) = problem.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut min_ratio, mut log_sum, mut used) = (f64::INFINITY, 0.0, 0usize);
    for _ in 0..n_samples {
        let width = 10f64.powf(rng.gen_range(-3.0..0.0));
        let center: f64 = rng.gen_range(0.0..1.0);
        let (mut lhs, mut l1) = (0.0, 0.0);
        for (k, x) in mesh.midpoints().enumerate() {
            if (x - center).abs() > 0.5 * width {
                continue;
            }
            let u = rng.gen_range(lo.values()[k]..=hi.values()[k]);
            let d = u - ubar.values()[k];
            let ub = ubar.values()[k];
            // directional derivative of |·| at ū in direction d
            let dj = if ub > 0.0 { d } else if ub < 0.0 { -d } else { d.abs() };
            lhs += h * (p[k] * d + beta * dj);
            l1 += h * d.abs();
        }
        if l1 == 0.0 {
            continue;
        }
        let ratio = lhs / l1.powf(exponent);
        min_ratio = min_ratio.min(ratio);
        if ratio > 0.0 {
            log_sum += ratio.ln();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::InsufficientData("no admissible growth samples".into()));
    }
    Ok(GrowthReport { c_hat: (log_sum / used as f64).exp(), min_ratio, samples_used: used })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoscReport {
    pub tau: f64,
    /// Minimum of `J''(ū)v² / ‖z_v‖²` over the sampled directions.
    pub delta_hat: f64,
    pub directions: usize,
}

/// Samples the curvature of `J` at `ū` along random directions supported where
/// `|p̄| ≤ τ` (default `τ = 0.1 ‖p̄‖_∞`).
pub fn sosc_sample(
    problem: &ControlProblem,
    exact: &ExactSolution,
    n_directions: usize,
    tau: Option<f64>,
    seed: u64,
) -> Result<SoscReport> {
    let tau = tau.unwrap_or(0.1 * exact.p_bar.max_abs());
    let p_cells = cell_average(&exact.p_bar);
    let support: Vec<bool> = p_cells.values().iter().map(|p| (p.abs() - exact.level).abs() <= tau).collect();
    if !support.iter().any(|s| *s) {
        return Err(Error::InsufficientData(format!("no cells with |p̄| within {tau} of the switching level")));
    }
    let ev = problem.evaluate(&exact.u_bar, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta: f64 = f64::INFINITY;
    for _ in 0..n_directions {
        let v = FeFunction::new(
            *problem.mesh(),
            Space::P0,
            support.iter().map(|&s| if s { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect(),
        )?;
        let q = problem.hessian_at(&ev, &v)?;
        let z2 = problem.linearized_norm_sq(&ev, &v)?;
        if z2 > 0.0 {
            delta = delta.min(q / z2);
        }
    }
    Ok(SoscReport { tau, delta_hat: delta, directions: n_directions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::{build_section7, build_sparse};
    use crate::nonlinearity::NonlinearityKind;

    #[test]
    fn zero_direction_rejected() {
        let (p, ex) = build_section7(NonlinearityKind::Sin, 16).unwrap();
        let v = FeFunction::zeros(*p.mesh(), Space::P0);
        assert!(directional_check(&p, &ex.u_bar, &v, 0.0, &[1e-4]).is_err());
    }

    #[test]
    fn linear_case_is_accurate() {
        // moderate data: with the benchmark's large y_d the cancellation floor sits near 1e-6
        let mesh = crate::fem::Mesh::unit(128).unwrap();
        let st = crate::pde::StateEquation::new(mesh, crate::nonlinearity::Nonlinearity::new(NonlinearityKind::Zero));
        let y_d = FeFunction::interpolate_p1(mesh, |x| (2.0 * std::f64::consts::PI * x).sin());
        let p = ControlProblem::with_constant_bounds(st, y_d, -1.0, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_feasible(&p, &mut rng);
        let rows = gradient_check(&p, &u, 0.0, 3, &[1e-5], 2, Execution::Sequential).unwrap();
        assert!(rows.iter().all(|r| r.rel_error <= 1e-7), "{rows:?}");
    }

    #[test]
    fn error_curve_is_v_shaped() {
        let (p, _) = build_section7(NonlinearityKind::Exp, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_feasible(&p, &mut rng);
        let hs: Vec<f64> = (0..12).map(|k| 10f64.powi(-k)).collect();
        let rows = gradient_check(&p, &u, 0.0, 1, &hs, 3, Execution::Sequential).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.rel_error).collect();
        let (imin, emin) = errs.iter().enumerate().fold((0, f64::INFINITY), |a, (i, e)| if *e < a.1 { (i, *e) } else { a });
        assert!(emin < 1e-5);
        assert!(imin > 0 && imin < errs.len() - 1, "{errs:?}");
        assert!(errs[0] > emin && errs[errs.len() - 1] > emin);
    }

    #[test]
    fn growth_positive_and_skips_identity() {
        let (p, ex) = build_section7(NonlinearityKind::Sin, 256).unwrap();
        let g = growth_check(&p, &ex, 100, 0).unwrap();
        assert!(g.min_ratio > 0.0 && g.c_hat > 0.0);
        let (p, ex) = build_sparse(NonlinearityKind::Sin, 0.5, 256).unwrap();
        let g = growth_check(&p, &ex, 100, 0).unwrap();
        assert!(g.min_ratio > 0.0);
        assert!(growth_check(&p, &ex, 0, 0).is_err());
    }

    #[test]
    fn sosc_curvature_positive() {
        for kind in [NonlinearityKind::Sin, NonlinearityKind::Cubic, NonlinearityKind::Exp] {
            let (p, ex) = build_section7(kind, 256).unwrap();
            let r = sosc_sample(&p, &ex, 20, None, 0).unwrap();
            assert!(r.delta_hat > 0.0, "{kind}: {r:?}");
        }
    }
}
