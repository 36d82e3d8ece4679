use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of an interval `(a, b)` into an even number of cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    n_cells: usize,
    a: f64,
    b: f64,
}

impl Mesh {
    pub fn new(n_cells: usize, a: f64, b: f64) -> Result<Self> {
        if n_cells < 2 || !n_cells.is_multiple_of(2) {
            return Err(Error::InvalidMesh(format!(
                "cell count must be even and at least 2, got {n_cells}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMesh(format!("degenerate domain ({a}, {b})")));
        }
        Ok(Self { n_cells, a, b })
    }

    /// Mesh of the unit interval.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(n_cells, 0.0, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Number of interior (free) nodes.
    pub fn n_interior(&self) -> usize {
        self.n_cells - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.node(i))
    }

    pub fn midpoint(&self, cell: usize) -> f64 {
        self.a + (cell as f64 + 0.5) * self.h()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |k| self.midpoint(k))
    }

    /// Cell containing `x`; points on an interior node belong to the right cell.
    pub fn locate(&self, x: f64) -> usize {
        let k = ((x - self.a) / self.h()).floor();
        (k.max(0.0) as usize).min(self.n_cells - 1)
    }
}
