use crate::error::{Error, Result};

/// Tridiagonal matrix over the interior nodes of a mesh.
///
/// `sub[i]` is entry `(i + 1, i)` and `sup[i]` is entry `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

/// Pivots smaller than this times the largest diagonal entry are treated as zero.
const PIVOT_RTOL: f64 = 1e-14;

impl TridiagonalMatrix {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Mismatch(format!(
                "tridiagonal bands of lengths {}/{}/{}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn identity(n: usize) -> Self {
        Self { sub: vec![0.0; n.saturating_sub(1)], diag: vec![1.0; n], sup: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// Entrywise `self + other`.
    pub fn add(&self, other: &TridiagonalMatrix) -> TridiagonalMatrix {
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        TridiagonalMatrix { sub: zip(&self.sub, &other.sub), diag: zip(&self.diag, &other.diag), sup: zip(&self.sup, &other.sup) }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "dimension mismatch in tridiagonal apply");
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm. Fails on a (near-)zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_pivots(rhs).map(|(x, _)| x)
    }

    /// Solves and also returns the elimination pivots. For a symmetric matrix all
    /// pivots are positive exactly when the matrix is positive definite.
    pub fn solve_with_pivots(&self, rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::Mismatch(format!("rhs has length {}, matrix dimension {n}", rhs.len())));
        }
        let scale = self.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let tiny = PIVOT_RTOL * scale.max(f64::MIN_POSITIVE);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivots = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 { self.diag[0] } else { self.diag[i] - self.sub[i - 1] * c[i - 1] };
            if !(pivot.abs() > tiny) {
                return Err(Error::SingularPivot { row: i, pivot });
            }
            pivots[i] = pivot;
            if i + 1 < n {
                c[i] = self.sup[i] / pivot;
            }
            d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - self.sub[i - 1] * d[i - 1]) / pivot };
        }
        let mut x = d;
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok((x, pivots))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_solve() {
        let r = vec![1.0, -2.0, 3.5];
        assert_eq!(TridiagonalMatrix::identity(3).solve(&r).unwrap(), r);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let t = TridiagonalMatrix::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::SingularPivot { row: 0, .. })));
        // singular 2x2 [[1,1],[1,1]]
        let t = TridiagonalMatrix::new(vec![1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(t.solve(&[1.0, 1.0]), Err(Error::SingularPivot { row: 1, .. })));
    }

    #[test]
    fn band_lengths_checked() {
        assert!(TridiagonalMatrix::new(vec![1.0], vec![1.0], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn solve_inverts_apply(
            diag in prop::collection::vec(3.0..10.0f64, 2..60),
            seed in prop::collection::vec(-1.0..1.0f64, 120),
        ) {
            let n = diag.len();
            let sub: Vec<f64> = seed[..n - 1].to_vec();
            let sup: Vec<f64> = seed[60..60 + n - 1].to_vec();
            let t = TridiagonalMatrix::new(sub, diag, sup).unwrap();
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let b = t.apply(&x);
            let y = t.solve(&b).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
            let r = t.apply(&y);
            let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (ri, bi) in r.iter().zip(&b) {
                prop_assert!((ri - bi).abs() <= 1e-12 * bmax.max(1.0));
            }
        }
    }
}
