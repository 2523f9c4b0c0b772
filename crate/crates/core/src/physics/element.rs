use crate::constants::AVOGADRO;

pub const NUM_ELEMENTS: usize = 12;

/// The base elements every tissue is mixed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementId {
    H,
    C,
    N,
    O,
    Na,
    Mg,
    P,
    S,
    Cl,
    Ar,
    K,
    Ca,
}

impl ElementId {
    pub const ALL: [ElementId; NUM_ELEMENTS] = [
        ElementId::H,
        ElementId::C,
        ElementId::N,
        ElementId::O,
        ElementId::Na,
        ElementId::Mg,
        ElementId::P,
        ElementId::S,
        ElementId::Cl,
        ElementId::Ar,
        ElementId::K,
        ElementId::Ca,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn data(self) -> &'static Element {
        &ELEMENTS[self.index()]
    }

    pub fn from_symbol(symbol: &str) -> Option<Self> {
        ELEMENTS
            .iter()
            .position(|e| e.symbol == symbol)
            .map(|i| Self::ALL[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub symbol: &'static str,
    pub z: u32,
    /// Mass number of the dominant isotope.
    pub a: u32,
    /// Mean excitation energy (eV).
    pub ionization_ev: f64,
    /// Standard atomic weight (g/mol).
    pub atomic_mass: f64,
}

impl Element {
    pub fn ionization_mev(&self) -> f64 {
        self.ionization_ev * 1e-6
    }

    /// Atoms per gram.
    pub fn atoms_per_gram(&self) -> f64 {
        AVOGADRO / self.atomic_mass
    }
}

const fn el(symbol: &'static str, z: u32, a: u32, ionization_ev: f64, atomic_mass: f64) -> Element {
    Element {
        symbol,
        z,
        a,
        ionization_ev,
        atomic_mass,
    }
}

/// Z, A, I (ICRU elemental values) and standard atomic weight.
pub const ELEMENTS: [Element; NUM_ELEMENTS] = [
    el("H", 1, 1, 19.2, 1.008),
    el("C", 6, 12, 78.0, 12.011),
    el("N", 7, 14, 82.0, 14.007),
    el("O", 8, 16, 95.0, 15.999),
    el("Na", 11, 23, 149.0, 22.990),
    el("Mg", 12, 24, 156.0, 24.305),
    el("P", 15, 31, 173.0, 30.974),
    el("S", 16, 32, 180.0, 32.06),
    el("Cl", 17, 35, 174.0, 35.45),
    el("Ar", 18, 40, 188.0, 39.948),
    el("K", 19, 39, 190.0, 39.098),
    el("Ca", 20, 40, 191.0, 40.078),
];
