//! Element and material data: HU conversion, Bragg-additive mixing, stopping
//! power, energy straggling and screened-Rutherford scattering moments.

mod element;
mod material;
mod moliere;
mod stopping;
mod straggling;

pub use element::{Element, ElementId, ELEMENTS, NUM_ELEMENTS};
pub use material::{
    CellMaterial, Composition, CompositionBin, DensitySection, MaterialField, SchneiderConversion,
};
pub use moliere::{ScatteringModel, ScatteringMoments};
pub use stopping::{StoppingPowerTable, StoppingPowers};
pub use straggling::{
    straggling_per_atom, straggling_per_atom_slope, straggling_per_gram, straggling_slope_per_gram, straggling_t,
};
