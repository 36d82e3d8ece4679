use bangbang::harness::{rate_sweep, RateColumn, SweepOptions};
use bangbang::optimizer::log_grid;
use bangbang::{build_section7, build_sparse, norm, solve_path, Execution, Norm, NonlinearityKind, OptimizerOptions, PathMode};

#[test]
fn cold_parallel_sweep_matches_sequential_bitwise() {
    let (problem, exact) = build_section7(NonlinearityKind::Exp, 512).unwrap();
    let alphas = log_grid(1e-1, 1e-4, 2).unwrap();
    let seq = SweepOptions { mode: PathMode::Cold(Execution::Sequential), ..Default::default() };
    let par = SweepOptions { mode: PathMode::Cold(Execution::Parallel { threads: 3 }), ..Default::default() };
    let a = rate_sweep(&problem, &exact, &alphas, &seq).unwrap();
    let b = rate_sweep(&problem, &exact, &alphas, &par).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.slopes, b.slopes);
}

#[test]
fn warm_and_cold_paths_agree_to_tolerance() {
    let (problem, _) = build_section7(NonlinearityKind::Cubic, 256).unwrap();
    let alphas = log_grid(1.0, 1e-3, 2).unwrap();
    let opts = OptimizerOptions { tol: 1e-11, ..Default::default() };
    let warm = solve_path(&problem, &alphas, &opts, PathMode::WarmStart).unwrap();
    let cold = solve_path(&problem, &alphas, &opts, PathMode::Cold(Execution::Sequential)).unwrap();
    for (w, c) in warm.iter().zip(&cold) {
        let (w, c) = (w.as_ref().unwrap(), c.as_ref().unwrap());
        assert!(w.converged && c.converged);
        let d = norm(&w.u.sub(&c.u).unwrap(), Norm::Linf, None);
        assert!(d < 1e-8, "alpha={}: {d:e}", w.alpha);
    }
}

#[test]
fn tracking_term_decreases_along_the_path() {
    let (problem, _) = build_section7(NonlinearityKind::Sin, 256).unwrap();
    let alphas = log_grid(1.0, 1e-3, 3).unwrap();
    let path = solve_path(&problem, &alphas, &OptimizerOptions::default(), PathMode::WarmStart).unwrap();
    let tracking: Vec<f64> = path.iter().map(|s| problem.tracking(&s.as_ref().unwrap().y).unwrap()).collect();
    for w in tracking.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{w:?}");
    }
}

/// Around a bang-bang switching point `u_α − ū` is odd, so its effect on the
/// state cancels to first order and `‖y_α − ȳ‖` shrinks like α², while the
/// one-sided transition of the sparse problem gives the first-order rate.
#[test]
fn state_error_rate_depends_on_switching_symmetry() {
    let alphas = log_grid(1e-1, 2e-3, 3).unwrap();
    let (problem, exact) = build_section7(NonlinearityKind::Exp, 4096).unwrap();
    let t = rate_sweep(&problem, &exact, &alphas, &SweepOptions::default()).unwrap();
    let s = t.slope(RateColumn::ErrYL2).unwrap().slope;
    assert!((s - 2.0).abs() < 0.1, "bang-bang state slope {s}");

    let (problem, exact) = build_sparse(NonlinearityKind::Exp, 0.5, 4096).unwrap();
    let t = rate_sweep(&problem, &exact, &alphas, &SweepOptions::default()).unwrap();
    let s = t.slope(RateColumn::ErrYL2).unwrap().slope;
    assert!((s - 1.0).abs() < 0.15, "sparse state slope {s}");
}
