mod common;

use bangbang::{build_section7, norm, solve_regularized, FeFunction, Norm, NonlinearityKind, OptimizerOptions, Space};
use common::pdas_oracle;

#[test]
fn linear_problem_matches_dense_active_set_solve_with_free_cells() {
    let n = 48;
    let (problem, _) = build_section7(NonlinearityKind::Zero, n).unwrap();
    let opts = OptimizerOptions { tol: 1e-13, max_outer: 20_000, ..Default::default() };
    for alpha in [0.2, 1.0, 5.0] {
        let oracle = pdas_oracle(n, alpha, problem.y_d().values(), problem.e_shift().values());
        let free = oracle.iter().filter(|v| v.abs() < 1.0 - 1e-12).count();
        assert!(free > 0, "alpha={alpha}: oracle solution has no free cells");

        let sol = solve_regularized(&problem, alpha, None, &opts).unwrap();
        assert!(sol.converged, "alpha={alpha}");
        let diff = FeFunction::new(*problem.mesh(), Space::P0, sol.u.values().iter().zip(oracle.iter()).map(|(a, b)| a - b).collect())
            .unwrap();
        let d = norm(&diff, Norm::L2, None);
        assert!(d < 1e-9, "alpha={alpha}: {d:e} ({free} free cells)");

        // the oracle's control is also stationary for our discrete optimality map
        let u_qp = FeFunction::new(*problem.mesh(), Space::P0, oracle.iter().copied().collect()).unwrap();
        assert!(problem.stationarity_residual(&u_qp, alpha).unwrap() < 1e-9);
    }
}

#[test]
fn bang_bang_limit_of_linear_problem() {
    // at small α every cell saturates and the solution is the sign pattern of −p̄
    let n = 32;
    let (problem, exact) = build_section7(NonlinearityKind::Zero, n).unwrap();
    let oracle = pdas_oracle(n, 1e-3, problem.y_d().values(), problem.e_shift().values());
    for (a, b) in oracle.iter().zip(exact.u_bar.values()) {
        assert_eq!(a, b);
    }
}
