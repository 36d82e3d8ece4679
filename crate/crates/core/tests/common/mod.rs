//! Independent oracles shared by the integration tests.

use nalgebra::{DMatrix, DVector};

/// Dense primal-dual active-set solve of the discrete linear-quadratic
/// problem, assembled from scratch.
pub fn pdas_oracle(n: usize, alpha: f64, y_d: &[f64], e: &[f64]) -> DVector<f64> {
    let h = 1.0 / n as f64;
    let ni = n - 1;
    let k = DMatrix::from_fn(ni, ni, |i, j| match i.abs_diff(j) {
        0 => 2.0 / h,
        1 => -1.0 / h,
        _ => 0.0,
    });
    let m = DMatrix::from_fn(n + 1, n + 1, |i, j| match i.abs_diff(j) {
        0 if i == 0 || i == n => h / 3.0,
        0 => 2.0 * h / 3.0,
        1 => h / 6.0,
        _ => 0.0,
    });
    // interior node i+1 touches cells i and i+1
    let b = DMatrix::from_fn(ni, n, |i, c| if c == i || c == i + 1 { h / 2.0 } else { 0.0 });
    let embed = DMatrix::from_fn(n + 1, ni, |r, c| if r == c + 1 { 1.0 } else { 0.0 });
    let kinv = k.try_inverse().expect("stiffness is invertible");
    let s = &embed * &kinv * &b;
    let r0 = &s * DVector::from_column_slice(e) - DVector::from_column_slice(y_d);
    let hess = s.transpose() * &m * &s + DMatrix::identity(n, n) * (alpha * h);
    let g = s.transpose() * &m * r0;

    let c = alpha * h;
    let mut u = DVector::zeros(n);
    let mut lam = DVector::zeros(n);
    let mut prev: Option<Vec<i8>> = None;
    for _ in 0..200 {
        let state: Vec<i8> = (0..n)
            .map(|i| {
                let t = u[i] + lam[i] / c;
                if t > 1.0 {
                    1
                } else if t < -1.0 {
                    -1
                } else {
                    0
                }
            })
            .collect();
        if prev.as_ref() == Some(&state) {
            break;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        let mut unew = DVector::from_fn(n, |i, _| state[i] as f64);
        if !free.is_empty() {
            let hff = DMatrix::from_fn(free.len(), free.len(), |a, b| hess[(free[a], free[b])]);
            let rhs = DVector::from_fn(free.len(), |a, _| {
                let i = free[a];
                -g[i] - (0..n).filter(|&j| state[j] != 0).map(|j| hess[(i, j)] * unew[j]).sum::<f64>()
            });
            let uf = hff.cholesky().expect("reduced Hessian is SPD").solve(&rhs);
            for (a, &i) in free.iter().enumerate() {
                unew[i] = uf[a];
            }
        }
        lam = -(&hess * &unew + &g);
        for &i in &free {
            lam[i] = 0.0;
        }
        u = unew;
        prev = Some(state);
    }
    u
}
