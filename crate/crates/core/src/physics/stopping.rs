use alloc::format;
use alloc::vec::Vec;

use super::element::{ElementId, NUM_ELEMENTS};
use super::material::CellMaterial;
use crate::math::{exp, ln};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Tabulated mass stopping power of one element (MeV·cm²/g), log-log interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingPowerTable {
    energies: Vec<f64>,
    values: Vec<f64>,
    log_e: Vec<f64>,
    log_s: Vec<f64>,
}

impl StoppingPowerTable {
    pub fn new(energies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if energies.len() != values.len() || energies.len() < 2 {
            return Err(Error::Table(format!(
                "stopping table needs >= 2 rows of (E, S), got {} energies and {} values",
                energies.len(),
                values.len()
            )));
        }
        if energies[0] <= 0.0 || energies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("stopping table energies must be positive and strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Table(format!("stopping table has non-positive value {v}")));
        }
        let log_e = energies.iter().map(|&e| ln(e)).collect();
        let log_s = values.iter().map(|&s| ln(s)).collect();
        Ok(Self { energies, values, log_e, log_s })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn energy_range(&self) -> (f64, f64) {
        (self.energies[0], self.energies[self.energies.len() - 1])
    }

    pub fn evaluate(&self, e: f64) -> Result<f64> {
        let (lo, hi) = self.energy_range();
        if !(e >= lo && e <= hi) {
            return Err(Error::OutOfRange { quantity: "energy (MeV)", value: e, min: lo, max: hi });
        }
        // First node with energy >= e.
        let j = self.energies.partition_point(|&x| x < e);
        if self.energies[j] == e {
            return Ok(self.values[j]);
        }
        let i = j - 1;
        let t = (ln(e) - self.log_e[i]) / (self.log_e[j] - self.log_e[i]);
        Ok(exp(self.log_s[i] + t * (self.log_s[j] - self.log_s[i])))
    }
}

/// Stopping tables for every base element.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingPowers {
    tables: Vec<StoppingPowerTable>,
}

impl StoppingPowers {
    /// `tables` must be in [`ElementId`] order.
    pub fn new(tables: Vec<StoppingPowerTable>) -> Result<Self> {
        if tables.len() != NUM_ELEMENTS {
            return Err(Error::Table(format!(
                "expected {NUM_ELEMENTS} stopping tables, got {}",
                tables.len()
            )));
        }
        Ok(Self { tables })
    }

    pub fn table(&self, element: ElementId) -> &StoppingPowerTable {
        &self.tables[element.index()]
    }

    /// Mass stopping power s_i(E) (MeV·cm²/g).
    pub fn mass_stopping(&self, i: usize, e: f64) -> Result<f64> {
        self.tables[i].evaluate(e).map_err(|err| match err {
            Error::OutOfRange { value, min, max, .. } => Error::OutOfRange {
                quantity: stopping_quantity(i),
                value,
                min,
                max,
            },
            other => other,
        })
    }

    /// Energy interval on which every element present in `cell` is tabulated.
    pub fn common_range(&self) -> (f64, f64) {
        self.tables.iter().fold((0.0, f64::INFINITY), |(lo, hi), t| {
            let (a, b) = t.energy_range();
            (lo.max(a), hi.min(b))
        })
    }

    /// S(E) = ρ Σ_i w_i s_i(E) (MeV/cm).
    pub fn mix_stopping_power(&self, cell: &CellMaterial, e: f64) -> Result<f64> {
        let mut s = 0.0;
        for i in 0..NUM_ELEMENTS {
            let rho_i = cell.partial_density(i);
            if rho_i > 0.0 {
                s += rho_i * self.mass_stopping(i, e)?;
            }
        }
        Ok(s)
    }

    /// Continuous-slowing-down range ∫_{e_lo}^{e_hi} dE / S(E) (cm).
    pub fn csda_range(&self, cell: &CellMaterial, e_lo: f64, e_hi: f64) -> Result<f64> {
        let gl = GaussLegendre::new(16);
        // Integrate in ln E with panels spanning the table nodes for accuracy.
        let panels = 200;
        let (a, b) = (ln(e_lo), ln(e_hi));
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in gl.mapped(lo, lo + h) {
                let e = exp(x);
                sum += w * e / self.mix_stopping_power(cell, e)?;
            }
        }
        Ok(sum)
    }
}

fn stopping_quantity(i: usize) -> &'static str {
    const NAMES: [&str; NUM_ELEMENTS] = [
        "stopping-table energy for H (MeV)",
        "stopping-table energy for C (MeV)",
        "stopping-table energy for N (MeV)",
        "stopping-table energy for O (MeV)",
        "stopping-table energy for Na (MeV)",
        "stopping-table energy for Mg (MeV)",
        "stopping-table energy for P (MeV)",
        "stopping-table energy for S (MeV)",
        "stopping-table energy for Cl (MeV)",
        "stopping-table energy for Ar (MeV)",
        "stopping-table energy for K (MeV)",
        "stopping-table energy for Ca (MeV)",
    ];
    NAMES[i]
}
