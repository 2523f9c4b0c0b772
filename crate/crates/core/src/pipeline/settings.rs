use alloc::format;
use alloc::vec::Vec;

use crate::dlra::TruncationPolicy;
use crate::physics::{MaterialField, ScatteringModel};
use crate::raytracer::{BeamSource, RayBundle, DEFAULT_MAX_STEP_CM};
use crate::spatial::{Boundary, Grid3D};
use crate::{Error, Result};

/// Collision operator of the collided equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionModel {
    /// Boltzmann operator from Legendre moments; `corrected` applies the extended
    /// transport correction with the degree-(N+1) moment.
    Boltzmann { corrected: bool },
    /// Fokker–Planck limit; `strength` ∈ [0, 1] scales the degree-(N+1) shift.
    FokkerPlanck { strength: f64 },
}

impl Default for CollisionModel {
    fn default() -> Self {
        CollisionModel::Boltzmann { corrected: true }
    }
}

/// When the low-rank state is truncated inside a pseudo-time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncateAfter {
    /// After the streaming and after the scattering substep.
    #[default]
    Both,
    /// Only after the scattering substep.
    Scattering,
}

/// Numerical settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// P_N degree N.
    pub degree: usize,
    pub model: CollisionModel,
    pub scattering: ScatteringModel,
    pub truncation: TruncationPolicy,
    pub truncate_after: TruncateAfter,
    /// Courant number of the pseudo-time step.
    pub cfl: f64,
    /// Cut-off energy (MeV).
    pub energy_min: f64,
    /// Fixed pseudo-time step (MeV); the CFL rule is used when absent.
    pub energy_step: Option<f64>,
    pub energy_groups: usize,
    pub max_march_step: f64,
    pub bundle: RayBundle,
    pub boundary: Boundary,
    /// Seed of the random orthonormal initial bases.
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            degree: 7,
            model: CollisionModel::default(),
            scattering: ScatteringModel::default(),
            truncation: TruncationPolicy::default(),
            truncate_after: TruncateAfter::default(),
            cfl: 0.7,
            energy_min: 1.0,
            energy_step: None,
            energy_groups: 128,
            max_march_step: DEFAULT_MAX_STEP_CM,
            bundle: RayBundle::default(),
            boundary: Boundary::Vacuum,
            seed: 0x5eed,
        }
    }
}

/// Geometry, materials and beams.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid3D,
    pub materials: MaterialField,
    pub beams: Vec<BeamSource>,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if self.materials.len() != self.grid.len() {
            return Err(Error::Shape(format!(
                "{} cell materials for a grid of {} cells",
                self.materials.len(),
                self.grid.len()
            )));
        }
        if self.beams.is_empty() {
            return Err(Error::Config("at least one beam is required".into()));
        }
        for (b, beam) in self.beams.iter().enumerate() {
            beam.validate().map_err(|e| e.with_context(&format!("beam {b}")))?;
        }
        Ok(())
    }
}

impl SolverSettings {
    pub fn validate(&self, cells: usize) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::Config("P_N degree must be at least 1".into()));
        }
        let m = (self.degree + 1) * (self.degree + 1);
        self.truncation.validate(cells, m)?;
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::Config(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.energy_min > 0.0) {
            return Err(Error::Config(format!("energy_min_mev must be positive, got {}", self.energy_min)));
        }
        if let Some(de) = self.energy_step {
            if !(de > 0.0 && de.is_finite()) {
                return Err(Error::Config(format!("energy_step_mev must be positive, got {de}")));
            }
        }
        if self.energy_groups == 0 {
            return Err(Error::Config("energy_groups must be positive".into()));
        }
        if !(self.max_march_step > 0.0) {
            return Err(Error::Config(format!("max_march_step_cm must be positive, got {}", self.max_march_step)));
        }
        if let CollisionModel::FokkerPlanck { strength } = self.model {
            if !(0.0..=1.0).contains(&strength) {
                return Err(Error::Config(format!("fp correction strength must lie in [0, 1], got {strength}")));
            }
        }
        if !(self.scattering.denominator_power > 0.0) {
            return Err(Error::Config(format!(
                "denominator power must be positive, got {}",
                self.scattering.denominator_power
            )));
        }
        self.bundle.validate()
    }
}
