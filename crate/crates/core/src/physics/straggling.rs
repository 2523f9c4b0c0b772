use super::element::{ElementId, ELEMENTS, NUM_ELEMENTS};
use super::material::CellMaterial;
use crate::constants::{Kinematics, COULOMB_MEV_CM, ELECTRON_MASS_MEV, FOUR_PI};
use crate::math::ln;
use crate::{Error, Result};

/// Straggling coefficient per target atom (MeV²·cm²):
/// `(e²/4πε₀)² · 4π Z · (4I / (3 m_e v²)) · ln(2 m_e v² / I)`.
pub fn straggling_per_atom(element: ElementId, e: f64) -> Result<f64> {
    let el = element.data();
    let i = el.ionization_mev();
    let mv2 = ELECTRON_MASS_MEV * Kinematics::proton(e).beta2;
    let arg = 2.0 * mv2 / i;
    if !(arg > 1.0) {
        return Err(Error::StragglingValidity { element: el.symbol, energy_mev: e });
    }
    Ok(COULOMB_MEV_CM * COULOMB_MEV_CM * FOUR_PI * el.z as f64 * (4.0 * i / (3.0 * mv2)) * ln(arg))
}

/// d/dE of [`straggling_per_atom`] (MeV·cm²).
pub fn straggling_per_atom_slope(element: ElementId, e: f64) -> Result<f64> {
    let el = element.data();
    let i = el.ionization_mev();
    let kin = Kinematics::proton(e);
    let mv2 = ELECTRON_MASS_MEV * kin.beta2;
    let arg = 2.0 * mv2 / i;
    if !(arg > 1.0) {
        return Err(Error::StragglingValidity { element: el.symbol, energy_mev: e });
    }
    let pref = COULOMB_MEV_CM * COULOMB_MEV_CM * FOUR_PI * el.z as f64 * 4.0 * i / 3.0;
    // d/dX [ln(2X/I)/X] = (1 - ln(2X/I)) / X²
    let d_dx = pref * (1.0 - ln(arg)) / (mv2 * mv2);
    Ok(d_dx * ELECTRON_MASS_MEV * kin.dbeta2_de())
}

/// T(E) = Σ_i N_i · t_i(E) over the elements present in the cell (MeV²/cm).
pub fn straggling_t(cell: &CellMaterial, e: f64) -> Result<f64> {
    let mut t = 0.0;
    for i in 0..NUM_ELEMENTS {
        let n = cell.atomic_density(i);
        if n > 0.0 {
            t += n * straggling_per_atom(ElementId::ALL[i], e)?;
        }
    }
    Ok(t)
}

/// Per-gram straggling coefficient of element `i` (MeV²·cm²/g).
pub fn straggling_per_gram(i: usize, e: f64) -> Result<f64> {
    Ok(straggling_per_atom(ElementId::ALL[i], e)? * ELEMENTS[i].atoms_per_gram())
}

/// dT/dE per gram of element `i` (MeV·cm²/g).
pub fn straggling_slope_per_gram(i: usize, e: f64) -> Result<f64> {
    Ok(straggling_per_atom_slope(ElementId::ALL[i], e)? * ELEMENTS[i].atoms_per_gram())
}
