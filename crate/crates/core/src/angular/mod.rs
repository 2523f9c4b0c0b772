//! Real spherical-harmonics basis and the P_N operators built on it.

mod basis;
mod flux;
mod scattering;

pub use basis::{laplace_beltrami_matrix, PnBasis, SphereQuadrature};
pub use flux::FluxMatrices;
pub use scattering::{
    boltzmann_diagonal, fp_diagonal, transport_correction, CollisionDiagonal,
};
