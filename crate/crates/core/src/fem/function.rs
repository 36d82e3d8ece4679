use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::error::{Error, Result};

/// Discrete space a [`FeFunction`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// Continuous piecewise linear, one value per node.
    P1,
    /// Piecewise constant, one value per cell.
    P0,
}

/// A nodal (P1) or cellwise-constant (P0) function on a [`Mesh`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeFunction {
    mesh: Mesh,
    space: Space,
    values: Vec<f64>,
}

impl FeFunction {
    pub fn new(mesh: Mesh, space: Space, values: Vec<f64>) -> Result<Self> {
        let expected = match space {
            Space::P1 => mesh.n_nodes(),
            Space::P0 => mesh.n_cells(),
        };
        if values.len() != expected {
            return Err(Error::Mismatch(format!(
                "{space:?} function needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { mesh, space, values })
    }

    pub fn zeros(mesh: Mesh, space: Space) -> Self {
        let n = match space {
            Space::P1 => mesh.n_nodes(),
            Space::P0 => mesh.n_cells(),
        };
        Self { mesh, space, values: vec![0.0; n] }
    }

    pub fn constant(mesh: Mesh, space: Space, c: f64) -> Self {
        let mut f = Self::zeros(mesh, space);
        f.values.iter_mut().for_each(|v| *v = c);
        f
    }

    /// Nodal interpolant.
    pub fn interpolate_p1(mesh: Mesh, f: impl FnMut(f64) -> f64) -> Self {
        Self { mesh, space: Space::P1, values: mesh.nodes().map(f).collect() }
    }

    /// Nodal interpolant with the two boundary values forced to zero.
    pub fn interpolate_p1_dirichlet(mesh: Mesh, f: impl FnMut(f64) -> f64) -> Self {
        let mut g = Self::interpolate_p1(mesh, f);
        let n = mesh.n_cells();
        g.values[0] = 0.0;
        g.values[n] = 0.0;
        g
    }

    /// Midpoint sampling.
    pub fn sample_p0(mesh: Mesh, f: impl FnMut(f64) -> f64) -> Self {
        Self { mesh, space: Space::P0, values: mesh.midpoints().map(f).collect() }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same mesh and space as `other`.
    pub fn check_compatible(&self, other: &FeFunction) -> Result<()> {
        if self.mesh != other.mesh || self.space != other.space {
            return Err(Error::Mismatch(format!(
                "{:?} on {} cells vs {:?} on {} cells",
                self.space,
                self.mesh.n_cells(),
                other.space,
                other.mesh.n_cells()
            )));
        }
        Ok(())
    }

    pub fn expect(&self, mesh: &Mesh, space: Space) -> Result<()> {
        if &self.mesh != mesh || self.space != space {
            return Err(Error::Mismatch(format!(
                "expected {space:?} on {} cells, got {:?} on {} cells",
                mesh.n_cells(),
                self.space,
                self.mesh.n_cells()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { mesh: self.mesh, space: self.space, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &FeFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + scale * b).collect();
        Ok(Self { mesh: self.mesh, space: self.space, values })
    }

    pub fn sub(&self, other: &FeFunction) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &FeFunction) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Point evaluation (linear interpolation for P1, cell value for P0).
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.mesh.locate(x);
        match self.space {
            Space::P0 => self.values[k],
            Space::P1 => {
                let t = ((x - self.mesh.node(k)) / self.mesh.h()).clamp(0.0, 1.0);
                (1.0 - t) * self.values[k] + t * self.values[k + 1]
            }
        }
    }

    /// Exact L2 inner product of two functions in the same space.
    pub fn inner(&self, other: &FeFunction) -> Result<f64> {
        self.check_compatible(other)?;
        let h = self.mesh.h();
        Ok(match self.space {
            Space::P0 => h * dot(&self.values, &other.values),
            Space::P1 => {
                let (u, v) = (&self.values, &other.values);
                (0..self.mesh.n_cells())
                    .map(|k| {
                        h / 6.0
                            * (2.0 * u[k] * v[k] + u[k] * v[k + 1] + u[k + 1] * v[k] + 2.0 * u[k + 1] * v[k + 1])
                    })
                    .sum()
            }
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
