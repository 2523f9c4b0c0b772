use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::angular::{boltzmann_diagonal, fp_diagonal, CollisionDiagonal};
use crate::physics::{
    straggling_per_gram, straggling_slope_per_gram, CellMaterial, MaterialField, ScatteringModel, StoppingPowers,
    NUM_ELEMENTS,
};
use crate::raytracer::EnergyCoefficients;
use crate::Result;

use super::settings::CollisionModel;

/// Distinct materials of a field and the medium index of every cell.
#[derive(Debug, Clone)]
pub struct Media {
    pub materials: Vec<CellMaterial>,
    pub cell_medium: Vec<usize>,
}

impl Media {
    pub fn new(field: &MaterialField) -> Self {
        let mut index: BTreeMap<[u64; NUM_ELEMENTS + 1], usize> = BTreeMap::new();
        let mut materials = Vec::new();
        let cell_medium = field
            .cells()
            .iter()
            .map(|c| {
                let mut key = [0u64; NUM_ELEMENTS + 1];
                key[0] = c.density().to_bits();
                for (k, w) in key[1..].iter_mut().zip(c.weights()) {
                    *k = w.to_bits();
                }
                *index.entry(key).or_insert_with(|| {
                    materials.push(*c);
                    materials.len() - 1
                })
            })
            .collect();
        Self { materials, cell_medium }
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    /// Per-cell values from per-medium values.
    pub fn spread(&self, per_medium: &[f64]) -> Vec<f64> {
        self.cell_medium.iter().map(|&k| per_medium[k]).collect()
    }

    /// Elements with nonzero mass fraction in some medium.
    pub fn present_elements(&self) -> Vec<usize> {
        (0..NUM_ELEMENTS).filter(|&i| self.materials.iter().any(|m| m.is_present(i))).collect()
    }
}

/// Per-gram element physics at the P_N degree of the run.
#[derive(Debug, Clone, Copy)]
pub struct ElementPhysics<'a> {
    pub stopping: &'a StoppingPowers,
    pub scattering: &'a ScatteringModel,
    pub model: CollisionModel,
    pub degree: usize,
}

impl ElementPhysics<'_> {
    /// Collision diagonal of element `i` per unit partial density (cm²/g).
    pub fn collision(&self, i: usize, e: f64) -> Result<CollisionDiagonal> {
        let moments = self.scattering.moments_per_gram(i, e, self.degree + 1)?;
        match self.model {
            CollisionModel::Boltzmann { corrected } => boltzmann_diagonal(&moments, self.degree, corrected),
            CollisionModel::FokkerPlanck { strength } => fp_diagonal(moments.xi1(), self.degree, strength),
        }
    }

    /// S(E) of a material (MeV/cm).
    pub fn stopping_power(&self, material: &CellMaterial, e: f64) -> Result<f64> {
        self.stopping.mix_stopping_power(material, e)
    }

    /// Energy-direction coefficients of element `i` at unit partial density.
    pub fn energy_coefficients(&self, i: usize) -> ElementEnergyCoefficients<'_> {
        ElementEnergyCoefficients { physics: *self, element: i }
    }
}

/// Drift S* = s + ½ dT/dE, diffusion T/2 and uncollided removal Σ_t per gram of one element.
#[derive(Debug, Clone, Copy)]
pub struct ElementEnergyCoefficients<'a> {
    physics: ElementPhysics<'a>,
    element: usize,
}

impl EnergyCoefficients for ElementEnergyCoefficients<'_> {
    fn drift(&self, e: f64) -> Result<f64> {
        let s = self.physics.stopping.mass_stopping(self.element, e)?;
        Ok(s + 0.5 * straggling_slope_per_gram(self.element, e)?)
    }

    fn diffusion(&self, e: f64) -> Result<f64> {
        Ok(0.5 * straggling_per_gram(self.element, e)?)
    }

    fn removal(&self, e: f64) -> Result<f64> {
        Ok(self.physics.collision(self.element, e)?.total)
    }
}
