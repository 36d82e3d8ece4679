//! Uniform 1D meshes, P1/P0 finite element functions, tridiagonal assembly
//! and exact integration of norms and level-band measures.

mod assembly;
mod function;
mod measure;
mod mesh;
mod tridiag;

pub use assembly::{
    assemble_mass, assemble_reaction, assemble_stiffness, assemble_weighted_stiffness,
    cell_average, control_load, density_load, nonlinear_load, GAUSS_2,
};
pub use function::{FeFunction, Space};
pub use measure::{band_measure, norm, Interval, Norm, PiecewiseConstant};
pub use mesh::Mesh;
pub use tridiag::TridiagonalMatrix;
