//! Physical constants in the internal (cm, MeV, g) unit system. CODATA 2018.

use core::f64::consts::PI;

/// Proton rest energy (MeV), the value the kinematics are specified with.
pub const PROTON_MASS_MEV: f64 = 938.272;
/// Electron rest energy (MeV).
pub const ELECTRON_MASS_MEV: f64 = 0.510_998_95;
/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
/// Reduced Planck constant times c (MeV·cm).
pub const HBAR_C_MEV_CM: f64 = 1.973_269_804e-11;
/// e²/(4πε₀) (MeV·cm).
pub const COULOMB_MEV_CM: f64 = FINE_STRUCTURE * HBAR_C_MEV_CM;
/// Avogadro constant (1/mol).
pub const AVOGADRO: f64 = 6.022_140_76e23;

pub const FOUR_PI: f64 = 4.0 * PI;

/// Relativistic quantities of a proton with kinetic energy `e` (MeV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub gamma: f64,
    pub beta2: f64,
    /// Momentum times c (MeV).
    pub pc: f64,
}

impl Kinematics {
    pub fn proton(e: f64) -> Self {
        let gamma = 1.0 + e / PROTON_MASS_MEV;
        let beta2 = 1.0 - 1.0 / (gamma * gamma);
        let pc = crate::math::sqrt(e * (e + 2.0 * PROTON_MASS_MEV));
        Self { gamma, beta2, pc }
    }

    pub fn beta(&self) -> f64 {
        crate::math::sqrt(self.beta2)
    }

    /// d(β²)/dE (1/MeV).
    pub fn dbeta2_de(&self) -> f64 {
        2.0 / (self.gamma * self.gamma * self.gamma * PROTON_MASS_MEV)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_constant_matches_reference() {
        // e²/(4πε₀) = 1.439964548 MeV·fm
        assert!((COULOMB_MEV_CM / 1.439_964_548e-13 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kinematics_nonrelativistic_limit() {
        let k = Kinematics::proton(1e-3);
        let classical = 2.0 * 1e-3 / PROTON_MASS_MEV;
        assert!((k.beta2 / classical - 1.0).abs() < 1e-5);
    }

    #[test]
    fn beta_derivative_matches_difference() {
        let e = 50.0;
        let h = 1e-4;
        let fd = (Kinematics::proton(e + h).beta2 - Kinematics::proton(e - h).beta2) / (2.0 * h);
        assert!((Kinematics::proton(e).dbeta2_de() / fd - 1.0).abs() < 1e-8);
    }
}
