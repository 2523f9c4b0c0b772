//! Uncollided flux by ray marching: P2 discontinuous Galerkin in energy,
//! Crank–Nicolson in depth, bilinear deposition of a stratified ray bundle.

mod beam;
mod blocks;
mod energy;
mod geometry;
mod march;

pub use beam::{BeamSource, BundlePlan, RayBundle, RayRequest, RaySpectra, UncollidedFlux};
pub use blocks::{Block3, BlockTridiag, FactoredBlockTridiag};
pub use energy::{
    assemble_energy_operator, ConstantCoefficients, EnergyCoefficients, EnergyDgSpace, SIPG_PENALTY,
};
pub use geometry::{traverse, PathSegment};
pub use march::{march_ray, RaySolution, DEFAULT_MAX_STEP_CM};
