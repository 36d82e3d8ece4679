//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see the
//! report. Criteria listed in `EXPECTED_RED` are known not to hold for the
//! discretization used here; they are still evaluated at full tolerance and
//! reported as FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use bangbang::harness::{
    asc_sweep, best_per_direction, default_epsilons, gradient_check_random, growth_check, rate_sweep, RateColumn,
    RateTable, SweepOptions,
};
use bangbang::{
    build_section7, build_sparse, norm, solve_regularized, Execution, FeFunction, Norm, NonlinearityKind,
    OptimizerOptions, Space,
};

mod common;
use common::pdas_oracle;

/// Criteria that fail at their stated tolerance; see the README section on
/// convergence rates for the analysis.
const EXPECTED_RED: &[usize] = &[2];

const RATE_CELLS: usize = 1 << 13;

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn alphas() -> Vec<f64> {
    bangbang::optimizer::log_grid(1e-1, 1e-5, 3).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn slope_text(t: &RateTable, col: RateColumn) -> String {
    match t.slope(col) {
        Some(f) => format!("{}={:.3} (r2 {:.4}, {} pts)", col.key(), f.slope, f.r2, f.points),
        None => format!("{}=undefined", col.key()),
    }
}

fn rate_tables() -> Vec<(NonlinearityKind, RateTable, f64)> {
    [NonlinearityKind::Sin, NonlinearityKind::Cubic, NonlinearityKind::Exp]
        .into_iter()
        .map(|kind| {
            let start = Instant::now();
            let (problem, exact) = build_section7(kind, RATE_CELLS).unwrap();
            let table = rate_sweep(&problem, &exact, &alphas(), &SweepOptions::default()).unwrap();
            (kind, table, start.elapsed().as_secs_f64())
        })
        .collect()
}

fn criterion_1(tables: &[(NonlinearityKind, RateTable, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, t, secs) in tables {
        let ok = t.all_converged()
            && t.slope(RateColumn::ErrUL2).is_some_and(|f| within(f.slope, 0.5, 0.1) && f.r2 >= 0.98)
            && *secs < 120.0;
        pass &= ok;
        parts.push(format!("{kind}: {} in {secs:.1}s", slope_text(t, RateColumn::ErrUL2)));
    }
    Outcome { id: 1, pass, detail: parts.join("; ") }
}

fn criterion_2(tables: &[(NonlinearityKind, RateTable, f64)]) -> Outcome {
    let cols = [RateColumn::ErrYL2, RateColumn::ErrPLinf, RateColumn::ErrUL1];
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, t, _) in tables {
        for col in cols {
            pass &= t.slope(col).is_some_and(|f| within(f.slope, 1.0, 0.15));
        }
        parts.push(format!("{kind}: {}", cols.map(|c| slope_text(t, c)).join(", ")));
    }
    Outcome { id: 2, pass, detail: parts.join("; ") }
}

fn criterion_3() -> Outcome {
    let (_, exact) = build_section7(NonlinearityKind::Zero, RATE_CELLS).unwrap();
    let report = asc_sweep(&exact.p_bar, 0.0, &default_epsilons(), Execution::Sequential).unwrap();
    let worst = report.rows.iter().map(|&(e, m)| (m - 2.0 * e.asin() / PI).abs()).fold(0.0, f64::max);
    let kappa = report.kappa_hat.unwrap_or(f64::NAN);
    Outcome {
        id: 3,
        pass: within(kappa, 1.0, 0.05) && worst <= 1e-3,
        detail: format!("kappa_hat={kappa:.4}, max |measure - 2 asin(eps)/pi|={worst:.2e}"),
    }
}

/// Nodal max errors of the state and adjoint solved at the exact control.
fn manufactured_errors(kind: NonlinearityKind, n: usize) -> (f64, f64) {
    let (problem, exact) = build_section7(kind, n).unwrap();
    let state = problem.solve_state(&exact.u_bar, None).unwrap();
    let p = problem.state_equation().solve_adjoint(&state.y, problem.y_d()).unwrap();
    let ey = state.y.sub(&exact.y_bar).unwrap().max_abs();
    let ep = p.sub(&exact.p_bar).unwrap().max_abs();
    (ey, ep)
}

fn criterion_4() -> Outcome {
    let ns: Vec<usize> = (6..=12).map(|k| 1 << k).collect();
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in NonlinearityKind::ALL {
        let (ey, ep): (Vec<f64>, Vec<f64>) = ns.iter().map(|&n| manufactured_errors(kind, n)).unzip();
        let sy = bangbang::harness::fit_loglog_slope(&hs, &ey).map(|f| f.slope).unwrap_or(f64::NAN);
        let sp = bangbang::harness::fit_loglog_slope(&hs, &ep).map(|f| f.slope).unwrap_or(f64::NAN);
        pass &= within(sy, 2.0, 0.15) && within(sp, 2.0, 0.15);
        parts.push(format!("{kind}: y {sy:.3}, p {sp:.3}"));
    }
    Outcome { id: 4, pass, detail: parts.join("; ") }
}

fn criterion_5() -> Outcome {
    let hs: Vec<f64> = (1..=9).map(|k| 10f64.powi(-k)).collect();
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for kind in [NonlinearityKind::Sin, NonlinearityKind::Cubic, NonlinearityKind::Exp] {
        let (problem, _) = build_section7(kind, 256).unwrap();
        let rows = gradient_check_random(&problem, 0.0, 10, 5, &hs, 0, Execution::from_jobs(0)).unwrap();
        let best = best_per_direction(&rows);
        assert_eq!(best.len(), 50);
        let w = best.iter().copied().fold(0.0, f64::max);
        worst = worst.max(w);
        parts.push(format!("{kind}: {w:.2e}"));
    }
    Outcome { id: 5, pass: worst <= 1e-5, detail: format!("worst best-h relative error per problem: {}", parts.join(", ")) }
}

fn criterion_6() -> Outcome {
    let (n, alpha) = (32, 1e-2);
    let (problem, _) = build_section7(NonlinearityKind::Zero, n).unwrap();
    let oracle = pdas_oracle(n, alpha, problem.y_d().values(), problem.e_shift().values());
    let opts = OptimizerOptions { tol: 1e-13, max_outer: 10_000, ..Default::default() };
    let sol = solve_regularized(&problem, alpha, None, &opts).unwrap();
    let diff = FeFunction::new(*problem.mesh(), Space::P0, sol.u.values().iter().zip(oracle.iter()).map(|(a, b)| a - b).collect())
        .unwrap();
    let d = norm(&diff, Norm::L2, None);
    Outcome {
        id: 6,
        pass: sol.converged && d <= 1e-8,
        detail: format!("||u - u_qp||_L2={d:.2e} (stationarity {:.1e}, {} iters)", sol.stationarity, sol.outer_iters),
    }
}

fn criterion_7() -> Outcome {
    let beta = 0.5;
    let (problem, exact) = build_sparse(NonlinearityKind::Sin, beta, RATE_CELLS).unwrap();
    let sol = solve_regularized(&problem, 1e-4, None, &OptimizerOptions::default()).unwrap();
    let h = problem.mesh().h();
    let zero_measure = sol.u.values().iter().filter(|v| **v == 0.0).count() as f64 * h;
    let table = rate_sweep(&problem, &exact, &alphas(), &SweepOptions::default()).unwrap();
    let slope_ok = table.slope(RateColumn::ErrUL2).is_some_and(|f| within(f.slope, 0.5, 0.1));
    Outcome {
        id: 7,
        pass: sol.converged && within(zero_measure, 1.0 / 3.0, 0.02) && slope_ok && table.all_converged(),
        detail: format!("|{{u=0}}|={zero_measure:.5}, {}", slope_text(&table, RateColumn::ErrUL2)),
    }
}

fn criterion_8() -> Outcome {
    let n = 1024;
    let mut problems = Vec::new();
    for kind in [NonlinearityKind::Sin, NonlinearityKind::Cubic, NonlinearityKind::Exp] {
        problems.push((format!("section7-{kind}"), build_section7(kind, n).unwrap()));
    }
    problems.push(("sparse-sin".to_string(), build_sparse(NonlinearityKind::Sin, 0.5, n).unwrap()));
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, (problem, exact)) in &problems {
        let r = growth_check(problem, exact, 100, 0).unwrap();
        pass &= r.min_ratio > 0.0 && r.samples_used > 0;
        parts.push(format!("{name}: {:.3e} ({} samples)", r.min_ratio, r.samples_used));
    }
    Outcome { id: 8, pass, detail: format!("min_ratio {}", parts.join(", ")) }
}

#[test]
fn acceptance_report() {
    let tables = rate_tables();
    let outcomes = [
        criterion_1(&tables),
        criterion_2(&tables),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && EXPECTED_RED.contains(&o.id) { " [expected]" } else { "" };
        println!("criterion {}: {tag}{note} -- {}", o.id, o.detail);
    }
    for o in &outcomes {
        if EXPECTED_RED.contains(&o.id) {
            assert!(!o.pass, "criterion {} now passes; remove it from EXPECTED_RED", o.id);
        } else {
            assert!(o.pass, "criterion {} failed: {}", o.id, o.detail);
        }
    }
}
