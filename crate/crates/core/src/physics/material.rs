use alloc::format;
use alloc::vec::Vec;

use super::element::{ElementId, ELEMENTS, NUM_ELEMENTS};
use crate::{Error, Result};

/// Mass fractions over the base elements, indexed by [`ElementId::index`].
pub type Composition = [f64; NUM_ELEMENTS];

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Density and elemental make-up of one voxel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMaterial {
    density: f64,
    weights: Composition,
}

impl CellMaterial {
    pub fn new(density: f64, weights: Composition) -> Result<Self> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::Table(format!("density must be positive, got {density}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Table(format!("negative or NaN mass fraction {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Table(format!("mass fractions sum to {sum}, expected 1")));
        }
        Ok(Self { density, weights })
    }

    pub fn pure(element: ElementId, density: f64) -> Result<Self> {
        let mut w = [0.0; NUM_ELEMENTS];
        w[element.index()] = 1.0;
        Self::new(density, w)
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn weights(&self) -> &Composition {
        &self.weights
    }

    /// Same composition at a different density.
    pub fn with_density(&self, density: f64) -> Result<Self> {
        Self::new(density, self.weights)
    }

    /// ρ·w_i (g/cm³): the coefficient every per-gram element quantity is mixed with.
    #[inline]
    pub fn partial_density(&self, i: usize) -> f64 {
        self.density * self.weights[i]
    }

    pub fn partial_densities(&self) -> Composition {
        let mut out = [0.0; NUM_ELEMENTS];
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = self.density * w;
        }
        out
    }

    /// N_i (atoms/cm³).
    pub fn atomic_density(&self, i: usize) -> f64 {
        self.partial_density(i) * ELEMENTS[i].atoms_per_gram()
    }

    pub fn atomic_densities(&self) -> Composition {
        let mut out = [0.0; NUM_ELEMENTS];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.atomic_density(i);
        }
        out
    }

    pub fn is_present(&self, i: usize) -> bool {
        self.weights[i] > 0.0
    }
}

/// Per-cell materials of a phantom, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    cells: Vec<CellMaterial>,
}

impl MaterialField {
    pub fn new(cells: Vec<CellMaterial>) -> Self {
        Self { cells }
    }

    pub fn uniform(material: CellMaterial, n: usize) -> Self {
        Self { cells: alloc::vec![material; n] }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellMaterial] {
        &self.cells
    }

    pub fn cell(&self, idx: usize) -> &CellMaterial {
        &self.cells[idx]
    }

    /// Column of partial densities of element `i` over all cells.
    pub fn partial_density_column(&self, i: usize) -> Vec<f64> {
        self.cells.iter().map(|c| c.partial_density(i)).collect()
    }

    /// Elements with nonzero weight in at least one cell, ascending.
    pub fn present_elements(&self) -> Vec<usize> {
        (0..NUM_ELEMENTS)
            .filter(|&i| self.cells.iter().any(|c| c.is_present(i)))
            .collect()
    }

    pub fn max_density(&self) -> f64 {
        self.cells.iter().map(|c| c.density).fold(0.0, f64::max)
    }
}

/// One linear section of the HU→density curve:
/// `density = offset + factor·(factor_offset + HU)` on `[hu_min, hu_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySection {
    pub hu_min: f64,
    pub hu_max: f64,
    pub offset: f64,
    pub factor: f64,
    pub factor_offset: f64,
}

impl DensitySection {
    pub fn density(&self, hu: f64) -> f64 {
        self.offset + self.factor * (self.factor_offset + hu)
    }
}

/// Constant elemental composition on `[hu_min, hu_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionBin {
    pub hu_min: f64,
    pub hu_max: f64,
    pub weights: Composition,
}

/// Piecewise HU conversion (Schneider-style): a density curve plus binned compositions.
#[derive(Debug, Clone, PartialEq)]
pub struct SchneiderConversion {
    density: Vec<DensitySection>,
    composition: Vec<CompositionBin>,
}

impl SchneiderConversion {
    pub fn new(density: Vec<DensitySection>, composition: Vec<CompositionBin>) -> Result<Self> {
        check_contiguous("density", density.iter().map(|s| (s.hu_min, s.hu_max)))?;
        check_contiguous("composition", composition.iter().map(|b| (b.hu_min, b.hu_max)))?;
        let (d0, d1) = (density[0].hu_min, density[density.len() - 1].hu_max);
        let (c0, c1) = (composition[0].hu_min, composition[composition.len() - 1].hu_max);
        if d0 != c0 || d1 != c1 {
            return Err(Error::Table(format!(
                "density covers [{d0}, {d1}] but composition covers [{c0}, {c1}]"
            )));
        }
        for s in &density {
            for hu in [s.hu_min, s.hu_max] {
                if !(s.density(hu) > 0.0) {
                    return Err(Error::Table(format!("non-positive density at {hu} HU")));
                }
            }
        }
        for b in &composition {
            let sum: f64 = b.weights.iter().sum();
            if b.weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::Table(format!(
                    "composition bin [{}, {}) is not a normalised mass-fraction vector",
                    b.hu_min, b.hu_max
                )));
            }
        }
        Ok(Self { density, composition })
    }

    /// Supported closed HU interval.
    pub fn hu_range(&self) -> (f64, f64) {
        (self.density[0].hu_min, self.density[self.density.len() - 1].hu_max)
    }

    pub fn density_sections(&self) -> &[DensitySection] {
        &self.density
    }

    pub fn composition_bins(&self) -> &[CompositionBin] {
        &self.composition
    }

    pub fn hu_to_material(&self, hu: f64) -> Result<CellMaterial> {
        let (lo, hi) = self.hu_range();
        if !(hu >= lo && hu <= hi) {
            return Err(Error::OutOfRange { quantity: "HU", value: hu, min: lo, max: hi });
        }
        let s = &self.density[find_bin(self.density.iter().map(|s| s.hu_max), hu)];
        let b = &self.composition[find_bin(self.composition.iter().map(|b| b.hu_max), hu)];
        CellMaterial::new(s.density(hu), b.weights)
    }
}

/// Index of the half-open bin containing `hu`; the last bin is closed.
fn find_bin(upper: impl Iterator<Item = f64>, hu: f64) -> usize {
    let mut last = 0;
    for (i, u) in upper.enumerate() {
        if hu < u {
            return i;
        }
        last = i;
    }
    last
}

fn check_contiguous(what: &str, bins: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut prev: Option<f64> = None;
    let mut count = 0;
    for (lo, hi) in bins {
        if !(hi > lo) {
            return Err(Error::Table(format!("{what} bin [{lo}, {hi}) is empty")));
        }
        if let Some(p) = prev {
            if p != lo {
                return Err(Error::Table(format!("{what} bins not contiguous at {p} vs {lo}")));
            }
        }
        prev = Some(hi);
        count += 1;
    }
    if count == 0 {
        return Err(Error::Table(format!("{what} table is empty")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn water_like() -> Composition {
        let mut w = [0.0; NUM_ELEMENTS];
        w[ElementId::H.index()] = 0.111894;
        w[ElementId::O.index()] = 1.0 - 0.111894;
        w
    }

    fn toy_conversion() -> SchneiderConversion {
        let mut air = [0.0; NUM_ELEMENTS];
        air[ElementId::N.index()] = 1.0;
        SchneiderConversion::new(
            alloc::vec![
                DensitySection { hu_min: -1000.0, hu_max: 0.0, offset: 1.0, factor: 0.0009, factor_offset: 0.0 },
                DensitySection { hu_min: 0.0, hu_max: 100.0, offset: 1.0, factor: 0.0, factor_offset: 0.0 },
            ],
            alloc::vec![
                CompositionBin { hu_min: -1000.0, hu_max: -500.0, weights: air },
                CompositionBin { hu_min: -500.0, hu_max: 100.0, weights: water_like() },
            ],
        )
        .unwrap()
    }

    #[test]
    fn atomic_densities_follow_avogadro() {
        let m = CellMaterial::new(1.0, water_like()).unwrap();
        let n_h = m.atomic_density(ElementId::H.index());
        let expected = 0.111894 * crate::constants::AVOGADRO / 1.008;
        assert!((n_h / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_weights() {
        let mut w = water_like();
        w[0] += 1e-9;
        assert!(CellMaterial::new(1.0, w).is_err());
        assert!(CellMaterial::new(0.0, water_like()).is_err());
    }

    #[test]
    fn conversion_bins_and_range() {
        let c = toy_conversion();
        let m = c.hu_to_material(-750.0).unwrap();
        assert!((m.density() - 0.325).abs() < 1e-15);
        assert_eq!(m.weights()[ElementId::N.index()], 1.0);
        let m = c.hu_to_material(100.0).unwrap();
        assert_eq!(m.density(), 1.0);
        match c.hu_to_material(100.5) {
            Err(Error::OutOfRange { min, max, .. }) => assert_eq!((min, max), (-1000.0, 100.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_gaps() {
        let r = SchneiderConversion::new(
            alloc::vec![DensitySection { hu_min: 0.0, hu_max: 1.0, offset: 1.0, factor: 0.0, factor_offset: 0.0 }],
            alloc::vec![CompositionBin { hu_min: 0.0, hu_max: 2.0, weights: water_like() }],
        );
        assert!(r.is_err());
    }
}
