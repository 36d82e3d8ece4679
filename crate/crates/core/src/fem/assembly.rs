use super::{FeFunction, Mesh, Space, TridiagonalMatrix};

/// Two-point Gauss rule on the reference cell `[0, 1]`: (abscissa, weight).
pub const GAUSS_2: [(f64, f64); 2] = [
    (0.5 - 0.288_675_134_594_812_9, 0.5),
    (0.5 + 0.288_675_134_594_812_9, 0.5),
];

/// P1 stiffness matrix of `-u''` on the interior nodes.
pub fn assemble_stiffness(mesh: &Mesh) -> TridiagonalMatrix {
    let m = mesh.n_interior();
    let h = mesh.h();
    TridiagonalMatrix {
        sub: vec![-1.0 / h; m - 1],
        diag: vec![2.0 / h; m],
        sup: vec![-1.0 / h; m - 1],
    }
}

/// Stiffness matrix of `-(a u')'` with `a` constant on each cell.
pub fn assemble_weighted_stiffness(mesh: &Mesh, coeff: &[f64]) -> TridiagonalMatrix {
    assert_eq!(coeff.len(), mesh.n_cells(), "one coefficient per cell");
    let m = mesh.n_interior();
    let h = mesh.h();
    // interior node i (1-based) touches cells i-1 and i
    let diag = (1..=m).map(|i| (coeff[i - 1] + coeff[i]) / h).collect();
    let off: Vec<f64> = (1..m).map(|i| -coeff[i] / h).collect();
    TridiagonalMatrix { sub: off.clone(), diag, sup: off }
}

/// P1 mass matrix on the interior nodes.
pub fn assemble_mass(mesh: &Mesh) -> TridiagonalMatrix {
    let m = mesh.n_interior();
    let h = mesh.h();
    TridiagonalMatrix {
        sub: vec![h / 6.0; m - 1],
        diag: vec![2.0 * h / 3.0; m],
        sup: vec![h / 6.0; m - 1],
    }
}

/// Values of a P1 function at the two Gauss points of `cell`.
#[inline]
pub(crate) fn at_gauss(values: &[f64], cell: usize) -> [f64; 2] {
    let (l, r) = (values[cell], values[cell + 1]);
    [
        (1.0 - GAUSS_2[0].0) * l + GAUSS_2[0].0 * r,
        (1.0 - GAUSS_2[1].0) * l + GAUSS_2[1].0 * r,
    ]
}

/// Reaction matrix with entries `∫ c(y) φ_i φ_j`, 2-point Gauss per cell.
pub fn assemble_reaction(mesh: &Mesh, y: &FeFunction, c: impl Fn(f64) -> f64) -> TridiagonalMatrix {
    debug_assert_eq!(y.space(), Space::P1);
    let n = mesh.n_cells();
    let m = mesh.n_interior();
    let h = mesh.h();
    // full (n+1) x (n+1) bands, interior part extracted at the end
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for k in 0..n {
        let yg = at_gauss(y.values(), k);
        for (q, &(xi, w)) in GAUSS_2.iter().enumerate() {
            let cw = h * w * c(yg[q]);
            let (pl, pr) = (1.0 - xi, xi);
            diag[k] += cw * pl * pl;
            diag[k + 1] += cw * pr * pr;
            off[k] += cw * pl * pr;
        }
    }
    TridiagonalMatrix { sub: off[1..m].to_vec(), diag: diag[1..=m].to_vec(), sup: off[1..m].to_vec() }
}

/// Load vector `∫ g(y) φ_i` on the interior nodes, 2-point Gauss per cell.
pub fn nonlinear_load(mesh: &Mesh, y: &FeFunction, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = mesh.n_cells();
    let h = mesh.h();
    let mut full = vec![0.0; n + 1];
    for k in 0..n {
        let yg = at_gauss(y.values(), k);
        for (q, &(xi, w)) in GAUSS_2.iter().enumerate() {
            let gw = h * w * g(yg[q]);
            full[k] += gw * (1.0 - xi);
            full[k + 1] += gw * xi;
        }
    }
    full[1..n].to_vec()
}

/// Load `∫ v φ_i` of a P0 function on the interior nodes.
pub fn control_load(v: &FeFunction) -> Vec<f64> {
    debug_assert_eq!(v.space(), Space::P0);
    let h = v.mesh().h();
    let c = v.values();
    (1..v.mesh().n_cells()).map(|i| 0.5 * h * (c[i - 1] + c[i])).collect()
}

/// Load `∫ v φ_i` of a P1 function (boundary values included) on the interior nodes.
pub fn density_load(v: &FeFunction) -> Vec<f64> {
    debug_assert_eq!(v.space(), Space::P1);
    let h = v.mesh().h();
    let c = v.values();
    (1..v.mesh().n_cells())
        .map(|i| h / 6.0 * (c[i - 1] + 4.0 * c[i] + c[i + 1]))
        .collect()
}

/// Cellwise mean of a P1 function.
pub fn cell_average(p: &FeFunction) -> FeFunction {
    debug_assert_eq!(p.space(), Space::P1);
    let v = p.values();
    let values = (0..p.mesh().n_cells()).map(|k| 0.5 * (v[k] + v[k + 1])).collect();
    FeFunction::new(*p.mesh(), Space::P0, values).expect("cell count matches")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior(f: &FeFunction) -> Vec<f64> {
        let v = f.values();
        v[1..v.len() - 1].to_vec()
    }

    #[test]
    fn stiffness_entries_and_row_sums() {
        let m = Mesh::unit(4).unwrap();
        let k = assemble_stiffness(&m);
        assert!(k.diag.iter().all(|&d| (d - 8.0).abs() < 1e-12));
        assert!(k.sub.iter().all(|&d| (d + 4.0).abs() < 1e-12));
        assert!(k.is_symmetric());
        let sums = k.apply(&[1.0, 1.0, 1.0]);
        assert!((sums[1]).abs() < 1e-12);
        assert!((sums[0] - 4.0).abs() < 1e-12 && (sums[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_stiffness_reduces_to_plain() {
        let m = Mesh::unit(10).unwrap();
        assert_eq!(assemble_weighted_stiffness(&m, &[1.0; 10]), assemble_stiffness(&m));
    }

    #[test]
    fn mass_entries() {
        let m = Mesh::unit(4).unwrap();
        let mm = assemble_mass(&m);
        assert!((mm.diag[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((mm.sub[0] - 1.0 / 24.0).abs() < 1e-15);
        let row = mm.apply(&[1.0, 1.0, 1.0]);
        assert!((row[1] - 0.25).abs() < 1e-15);
        // strict interior (h, 1-h) plus the two boundary-adjacent tails of h/3
        let total: f64 = row.iter().sum();
        assert!((total - (1.0 - 2.0 * m.h() + 2.0 * m.h() / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn reaction_with_unit_coefficient_is_mass() {
        let m = Mesh::unit(12).unwrap();
        let y = FeFunction::interpolate_p1(m, |x| x.sin());
        let r = assemble_reaction(&m, &y, |_| 1.0);
        let mm = assemble_mass(&m);
        for (a, b) in r.diag.iter().zip(&mm.diag) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in r.sub.iter().zip(&mm.sub) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn loads_agree_with_mass() {
        let m = Mesh::unit(8).unwrap();
        let v = FeFunction::interpolate_p1_dirichlet(m, |x| x * (1.0 - x));
        let via_mass = assemble_mass(&m).apply(&interior(&v));
        for (a, b) in density_load(&v).iter().zip(&via_mass) {
            assert!((a - b).abs() < 1e-15);
        }
        let ones = FeFunction::constant(m, Space::P0, 1.0);
        assert!(control_load(&ones).iter().all(|&l| (l - m.h()).abs() < 1e-15));
    }

    #[test]
    fn poisson_with_unit_load() {
        let m = Mesh::unit(64).unwrap();
        let k = assemble_stiffness(&m);
        let rhs = assemble_mass(&m).apply(&vec![1.0; m.n_interior()]);
        let y = k.solve(&rhs).unwrap();
        // P1 nodal values of x(1-x)/2 plus the O(h^2) effect of the truncated load near the boundary
        let mid = y[m.n_interior() / 2];
        assert!((mid - 0.125).abs() <= m.h() * m.h());
        let ones = FeFunction::constant(m, Space::P0, 1.0);
        let y = k.solve(&control_load(&ones)).unwrap();
        // with the exact load P1 is nodally exact in 1D
        for (i, yi) in y.iter().enumerate() {
            let x = m.node(i + 1);
            assert!((yi - 0.5 * x * (1.0 - x)).abs() < 1e-13);
        }
    }
}
