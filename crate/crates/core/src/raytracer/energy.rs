use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::blocks::{Block3, BlockTridiag};
use crate::math::sqrt;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// SIPG penalty η = 10 (p + 1)² for p = 2.
pub const SIPG_PENALTY: f64 = 90.0;
const VOLUME_NODES: usize = 5;
const PROJECTION_NODES: usize = 12;

/// Equal-width energy elements carrying modal Legendre P0..P2 on each element.
/// Coefficient `3g + j` multiplies P_j(ξ) on group g, ξ ∈ [−1, 1] increasing with E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDgSpace {
    e_min: f64,
    e_max: f64,
    groups: usize,
}

impl EnergyDgSpace {
    pub fn new(e_min: f64, e_max: f64, groups: usize) -> Result<Self> {
        if !(e_min > 0.0 && e_max > e_min) || groups == 0 {
            return Err(Error::Config(format!(
                "energy space needs 0 < E_min < E_max and groups > 0, got [{e_min}, {e_max}] with {groups} groups"
            )));
        }
        Ok(Self { e_min, e_max, groups })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn dofs(&self) -> usize {
        3 * self.groups
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn width(&self) -> f64 {
        (self.e_max - self.e_min) / self.groups as f64
    }

    pub fn bounds(&self, g: usize) -> (f64, f64) {
        let h = self.width();
        (self.e_min + g as f64 * h, self.e_min + (g + 1) as f64 * h)
    }

    pub fn center(&self, g: usize) -> f64 {
        self.e_min + (g as f64 + 0.5) * self.width()
    }

    /// Diagonal of the element mass matrix: h·(1, 1/3, 1/5).
    pub fn mass_diagonal(&self) -> [f64; 3] {
        let h = self.width();
        [h, h / 3.0, h / 5.0]
    }

    /// L2 projection of `f` onto the space.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let gl = GaussLegendre::new(PROJECTION_NODES);
        let mut out = vec![0.0; self.dofs()];
        for g in 0..self.groups {
            let (a, b) = self.bounds(g);
            let mut c = [0.0; 3];
            for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
                let v = f(0.5 * (a + b) + 0.5 * (b - a) * xi);
                let p = legendre3(xi);
                for j in 0..3 {
                    c[j] += w * v * p[j];
                }
            }
            for j in 0..3 {
                out[3 * g + j] = c[j] * (2 * j + 1) as f64 / 2.0;
            }
        }
        out
    }

    /// Pointwise value of a DG function (upper element at interior faces).
    pub fn evaluate(&self, coeffs: &[f64], e: f64) -> f64 {
        if !(e >= self.e_min && e <= self.e_max) {
            return 0.0;
        }
        let h = self.width();
        let g = (((e - self.e_min) / h) as usize).min(self.groups - 1);
        let (a, b) = self.bounds(g);
        let p = legendre3((2.0 * e - a - b) / (b - a));
        coeffs[3 * g] * p[0] + coeffs[3 * g + 1] * p[1] + coeffs[3 * g + 2] * p[2]
    }

    /// Value at E_min (bottom of the first element).
    pub fn value_at_min(&self, coeffs: &[f64]) -> f64 {
        coeffs[0] - coeffs[1] + coeffs[2]
    }

    /// ∫ E^k ψ dE for k = 0, 1, 2 (exact for the piecewise quadratic).
    pub fn energy_moments(&self, coeffs: &[f64]) -> [f64; 3] {
        let gl = GaussLegendre::new(3);
        let mut m = [0.0; 3];
        for g in 0..self.groups {
            let (a, b) = self.bounds(g);
            for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
                let e = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let p = legendre3(xi);
                let v = coeffs[3 * g] * p[0] + coeffs[3 * g + 1] * p[1] + coeffs[3 * g + 2] * p[2];
                let jw = 0.5 * (b - a) * w * v;
                m[0] += jw;
                m[1] += jw * e;
                m[2] += jw * e * e;
            }
        }
        m
    }

    /// Relative L2 distance between a DG function and `f`.
    pub fn relative_l2_error<F: Fn(f64) -> f64>(&self, coeffs: &[f64], f: F) -> f64 {
        let gl = GaussLegendre::new(PROJECTION_NODES);
        let (mut num, mut den) = (0.0, 0.0);
        for g in 0..self.groups {
            let (a, b) = self.bounds(g);
            for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
                let e = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let p = legendre3(xi);
                let v = coeffs[3 * g] * p[0] + coeffs[3 * g + 1] * p[1] + coeffs[3 * g + 2] * p[2];
                let fv = f(e);
                num += w * (v - fv) * (v - fv);
                den += w * fv * fv;
            }
        }
        sqrt(num / den)
    }
}

#[inline]
fn legendre3(xi: f64) -> [f64; 3] {
    [1.0, xi, 0.5 * (3.0 * xi * xi - 1.0)]
}

#[inline]
fn legendre3_deriv(xi: f64) -> [f64; 3] {
    [0.0, 1.0, 3.0 * xi]
}

/// Energy-dependent coefficients of `∂_z ψ = ∂_E(S* ψ) + ∂_E(κ ∂_E ψ) − Σ ψ`.
pub trait EnergyCoefficients {
    /// Drift S* = S + ½ dT/dE (MeV/cm).
    fn drift(&self, e: f64) -> Result<f64>;
    /// Diffusion κ = T/2 (MeV²/cm).
    fn diffusion(&self, e: f64) -> Result<f64>;
    /// Removal cross section Σ (1/cm).
    fn removal(&self, e: f64) -> Result<f64>;
}

/// Energy-independent coefficients (verification and idealised media).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficients {
    pub stopping: f64,
    pub straggling: f64,
    pub removal: f64,
}

impl EnergyCoefficients for ConstantCoefficients {
    fn drift(&self, _e: f64) -> Result<f64> {
        Ok(self.stopping)
    }
    fn diffusion(&self, _e: f64) -> Result<f64> {
        Ok(0.5 * self.straggling)
    }
    fn removal(&self, _e: f64) -> Result<f64> {
        Ok(self.removal)
    }
}

/// Assembles G such that `M dψ/dz = −G ψ`: absorption + Lax–Friedrichs drift + SIPG diffusion.
pub fn assemble_energy_operator<C: EnergyCoefficients + ?Sized>(
    space: &EnergyDgSpace,
    coeffs: &C,
) -> Result<BlockTridiag> {
    let nb = space.groups();
    let h = space.width();
    let gl = GaussLegendre::new(VOLUME_NODES);
    let mut op = BlockTridiag::zeros(nb);
    let jac = 2.0 / h;
    for g in 0..nb {
        let (a, b) = space.bounds(g);
        let blk = &mut op.diag[g];
        for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
            let e = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let (sig, drift, kappa) = (coeffs.removal(e)?, coeffs.drift(e)?, coeffs.diffusion(e)?);
            let p = legendre3(xi);
            let dp = legendre3_deriv(xi);
            let wq = 0.5 * h * w;
            for i in 0..3 {
                for j in 0..3 {
                    blk[i][j] += wq * (sig * p[j] * p[i] + drift * p[j] * jac * dp[i] + kappa * jac * dp[j] * jac * dp[i]);
                }
            }
        }
    }
    // Faces f = 0..=nb at E_min + f h; face f sits between elements f−1 (below) and f (above).
    let top = legendre3(1.0);
    let bot = legendre3(-1.0);
    let dtop = legendre3_deriv(1.0).map(|v| v * jac);
    let dbot = legendre3_deriv(-1.0).map(|v| v * jac);
    for f in 0..=nb {
        let e = space.e_min() + f as f64 * h;
        let s = coeffs.drift(e)?;
        // Local LF: largest |S*| over the face and the centres of the adjacent elements.
        let mut alpha = s.abs();
        if f > 0 {
            alpha = alpha.max(coeffs.drift(space.center(f - 1))?.abs());
        }
        if f < nb {
            alpha = alpha.max(coeffs.drift(space.center(f))?.abs());
        }
        // f̂ = cm ψ⁻ + cp ψ⁺ with flux function −S*ψ.
        let cm = 0.5 * (-s + alpha);
        let cp = 0.5 * (-s - alpha);
        let below = f.checked_sub(1);
        let above = if f < nb { Some(f) } else { None };
        // Element below: + f̂ φ_i(1); element above: − f̂ φ_i(−1). Missing sides carry ψ = 0.
        if let Some(l) = below {
            add(&mut op.diag[l], cm, &top, &top);
            if above.is_some() {
                add(&mut op.upper[l], cp, &top, &bot);
            }
        }
        if let Some(r) = above {
            add(&mut op.diag[r], -cp, &bot, &bot);
            if below.is_some() {
                add(&mut op.lower[r], -cm, &bot, &top);
            }
        }
        // SIPG on interior faces: jump [v] = v_below(1) − v_above(−1).
        if let (Some(l), Some(r)) = (below, above) {
            let kappa = coeffs.diffusion(e)?;
            let sigma = SIPG_PENALTY * kappa / h;
            // (row element, its side sign, value, derivative) combinations.
            let sides = [(l, 1.0, &top, &dtop), (r, -1.0, &bot, &dbot)];
            for &(row, sr, vr, dr) in &sides {
                for &(col, sc, vc, dc) in &sides {
                    let mut blk: Block3 = [[0.0; 3]; 3];
                    for i in 0..3 {
                        for j in 0..3 {
                            blk[i][j] = -0.5 * kappa * dc[j] * sr * vr[i] - 0.5 * kappa * dr[i] * sc * vc[j]
                                + sigma * sc * vc[j] * sr * vr[i];
                        }
                    }
                    let target = if row == col {
                        &mut op.diag[row]
                    } else if col > row {
                        &mut op.upper[row]
                    } else {
                        &mut op.lower[row]
                    };
                    for i in 0..3 {
                        for j in 0..3 {
                            target[i][j] += blk[i][j];
                        }
                    }
                }
            }
        }
    }
    Ok(op)
}

/// blk[i][j] += c · test[i] · trial[j]
fn add(blk: &mut Block3, c: f64, test: &[f64; 3], trial: &[f64; 3]) {
    for i in 0..3 {
        for j in 0..3 {
            blk[i][j] += c * test[i] * trial[j];
        }
    }
}
