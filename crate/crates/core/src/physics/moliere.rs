use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::element::{ElementId, ELEMENTS};
use crate::constants::{Kinematics, ELECTRON_MASS_MEV, FINE_STRUCTURE, HBAR_C_MEV_CM};
use crate::math::{cbrt, exp, ln, powf, sqrt};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Relative agreement required between the base and the doubled quadrature.
const MOMENT_TOL: f64 = 1e-10;
const PANELS: usize = 16;
const NODES_PER_PANEL: usize = 16;
/// 1 − μ below which the kernel peak is integrated in the log variable.
const PEAK_WIDTH: f64 = 0.1;

/// Screened-Rutherford elastic kernel with Molière screening.
///
/// The per-atom kernel is `τ_lab(μ) · 4α² / (k² (1 − μ + χ_α)^p)`, optionally
/// multiplied by `Z²/β²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringModel {
    /// Exponent `p` of the screened denominator.
    pub denominator_power: f64,
    /// Multiply by the Rutherford strength `Z²/β²`.
    pub rutherford_prefactor: bool,
    /// Apply the centre-of-mass → laboratory factor τ_lab.
    pub lab_frame: bool,
}

impl Default for ScatteringModel {
    fn default() -> Self {
        Self { denominator_power: 1.0, rutherford_prefactor: false, lab_frame: true }
    }
}

/// Legendre moments `g_ℓ = 2π∫P_ℓ Σ_s dμ` for ℓ = 0..=L together with the
/// cancellation-free differences `d_ℓ = g_0 − g_ℓ = 2π∫(1 − P_ℓ) Σ_s dμ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMoments {
    pub g: Vec<f64>,
    pub d: Vec<f64>,
}

impl ScatteringMoments {
    pub fn total(&self) -> f64 {
        self.g[0]
    }

    /// First transport coefficient ξ₁ = g_0 − g_1.
    pub fn xi1(&self) -> f64 {
        self.d[1]
    }

    pub fn max_degree(&self) -> usize {
        self.g.len() - 1
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            g: self.g.iter().map(|v| v * factor).collect(),
            d: self.d.iter().map(|v| v * factor).collect(),
        }
    }
}

impl ScatteringModel {
    /// Molière screening parameter χ_α = χ_0²(1.13 + 3.76 a²).
    pub fn screening(&self, element: ElementId, e: f64) -> f64 {
        let el = element.data();
        let kin = Kinematics::proton(e);
        let z = el.z as f64;
        let chi0 = 1.13 * FINE_STRUCTURE * cbrt(z) * ELECTRON_MASS_MEV / kin.pc;
        let a = z * FINE_STRUCTURE / kin.beta();
        chi0 * chi0 * (1.13 + 3.76 * a * a)
    }

    pub fn tau_lab(&self, element: ElementId, mu: f64) -> f64 {
        if !self.lab_frame {
            return 1.0;
        }
        let r = 1.0 / element.data().a as f64;
        let base = 1.0 + 2.0 * mu * r + r * r;
        base * sqrt(base) / (1.0 + mu * r)
    }

    /// Per-atom strength 4α²/k² (cm²), with the optional Z²/β² factor.
    fn strength(&self, element: ElementId, e: f64) -> f64 {
        let kin = Kinematics::proton(e);
        let k = kin.pc / HBAR_C_MEV_CM;
        let mut s = 4.0 * FINE_STRUCTURE * FINE_STRUCTURE / (k * k);
        if self.rutherford_prefactor {
            let z = element.data().z as f64;
            s *= z * z / kin.beta2;
        }
        s
    }

    /// Macroscopic differential cross section of `element` at atom density
    /// `atomic_density` (1/(cm·sr)).
    pub fn dcs(&self, element: ElementId, e: f64, mu: f64, atomic_density: f64) -> f64 {
        let chi = self.screening(element, e);
        atomic_density * self.strength(element, e) * self.tau_lab(element, mu)
            / powf(1.0 - mu + chi, self.denominator_power)
    }

    /// Moments up to degree `max_degree` for the given atom density.
    pub fn moments(
        &self,
        element: ElementId,
        e: f64,
        max_degree: usize,
        atomic_density: f64,
    ) -> Result<ScatteringMoments> {
        let chi = self.screening(element, e);
        let coarse = self.raw_moments(element, chi, max_degree, NODES_PER_PANEL);
        let fine = self.raw_moments(element, chi, max_degree, 2 * NODES_PER_PANEL);
        let d_scale = fine.1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err_g0 = (coarse.0 - fine.0).abs() / fine.0.abs();
        let err_d = coarse
            .1
            .iter()
            .zip(&fine.1)
            .map(|(a, b)| (a - b).abs() / d_scale.max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        let err_xi = if max_degree >= 1 { (coarse.1[1] - fine.1[1]).abs() / fine.1[1].abs() } else { 0.0 };
        let err = err_g0.max(err_d).max(err_xi);
        if !(err <= MOMENT_TOL) {
            return Err(Error::Numerical(format!(
                "scattering-moment quadrature for {} at {e} MeV did not converge: estimated relative error {err:.3e} > {MOMENT_TOL:.0e}",
                element.data().symbol
            )));
        }
        let scale = 2.0 * PI * atomic_density * self.strength(element, e);
        let g0 = fine.0 * scale;
        let d: Vec<f64> = fine.1.iter().map(|v| v * scale).collect();
        let g = d.iter().map(|dl| g0 - dl).collect();
        Ok(ScatteringMoments { g, d })
    }

    /// Moments per gram of element `i` (cm²/g); multiply by partial density.
    pub fn moments_per_gram(&self, i: usize, e: f64, max_degree: usize) -> Result<ScatteringMoments> {
        self.moments(ElementId::ALL[i], e, max_degree, ELEMENTS[i].atoms_per_gram())
    }

    /// Returns (∫f dμ, [∫(1 − P_ℓ) f dμ]_ℓ) for f = τ/(1−μ+χ)^p, without prefactors.
    fn raw_moments(&self, element: ElementId, chi: f64, max_degree: usize, nodes: usize) -> (f64, Vec<f64>) {
        let gl = GaussLegendre::new(nodes);
        let mut g0 = 0.0;
        let mut d = vec![0.0; max_degree + 1];
        let mut q = vec![0.0; max_degree + 1];
        let p = self.denominator_power;
        let mut accumulate = |y: f64, weight: f64| {
            // y = 1 − μ, weight already includes dμ and the kernel.
            let mu = 1.0 - y;
            one_minus_legendre(max_degree, mu, y, &mut q);
            g0 += weight;
            for (dl, ql) in d.iter_mut().zip(&q) {
                *dl += weight * ql;
            }
        };
        let (bulk_panels, peak) = if chi < PEAK_WIDTH { (PANELS / 2, true) } else { (PANELS, false) };
        let bulk_top = if peak { 1.0 - PEAK_WIDTH } else { 1.0 };
        // μ = −1 + u² removes the √(1+μ) endpoint behaviour of τ_lab for A = 1.
        let u_top = sqrt(bulk_top + 1.0);
        let h = u_top / bulk_panels as f64;
        for k in 0..bulk_panels {
            let a = k as f64 * h;
            for (u, w) in gl.mapped(a, a + h) {
                let mu = -1.0 + u * u;
                let y = 2.0 - u * u;
                let f = self.tau_lab(element, mu) / powf(y + chi, p);
                accumulate(y, 2.0 * u * w * f);
            }
        }
        if peak {
            // μ = 1 + χ − e^s, so 1 − μ + χ = e^s and dμ = e^s ds.
            let (s0, s1) = (ln(chi), ln(PEAK_WIDTH + chi));
            let panels = PANELS - bulk_panels;
            let hs = (s1 - s0) / panels as f64;
            for k in 0..panels {
                let a = s0 + k as f64 * hs;
                for (s, w) in gl.mapped(a, a + hs) {
                    let es = exp(s);
                    let y = es - chi;
                    let mu = 1.0 - y;
                    let f = self.tau_lab(element, mu) * exp((1.0 - p) * s);
                    accumulate(y, w * f);
                }
            }
        }
        (g0, d)
    }
}

/// Q_ℓ = 1 − P_ℓ(μ) for ℓ = 0..=n, using y = 1 − μ to avoid cancellation near μ = 1.
fn one_minus_legendre(n: usize, mu: f64, y: f64, q: &mut [f64]) {
    q[0] = 0.0;
    if n >= 1 {
        q[1] = y;
    }
    for l in 1..n {
        let lf = l as f64;
        q[l + 1] = ((2.0 * lf + 1.0) * (y + mu * q[l]) - lf * q[l - 1]) / (lf + 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::legendre_all;

    fn legendre_reference(n: usize, mu: f64) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        legendre_all(n, mu, &mut out);
        out
    }

    #[test]
    fn tau_at_forward_direction_hydrogen() {
        let m = ScatteringModel::default();
        assert!((m.tau_lab(ElementId::H, 1.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn chi_alpha_oxygen_80_mev_golden() {
        // Independent evaluation (tools/moliere_golden.py). The script takes its
        // constants from a newer CODATA release, which moves χ by ~1e-9.
        let chi = ScatteringModel::default().screening(ElementId::O, 80.0);
        assert!((chi / CHI_O_80_GOLDEN - 1.0).abs() < 1e-8, "{chi:e}");
    }

    #[test]
    fn kernel_is_forward_peaked() {
        let m = ScatteringModel::default();
        let n = 1e23;
        assert!(m.dcs(ElementId::C, 80.0, 0.999, n) > m.dcs(ElementId::C, 80.0, 0.0, n));
    }

    #[test]
    fn one_minus_legendre_matches_direct() {
        for &mu in &[-1.0, -0.3, 0.2, 0.9, 1.0 - 1e-6] {
            let mut q = vec![0.0; 21];
            one_minus_legendre(20, mu, 1.0 - mu, &mut q);
            let p = legendre_reference(20, mu);
            for l in 0..=20 {
                assert!((q[l] - (1.0 - p[l])).abs() < 1e-12, "l={l} mu={mu}");
            }
        }
    }

    #[test]
    fn cm_kernel_matches_closed_form() {
        let m = ScatteringModel { lab_frame: false, ..Default::default() };
        for el in [ElementId::H, ElementId::O, ElementId::Ca] {
            for e in [5.0, 30.0, 90.0, 200.0] {
                let chi = m.screening(el, e);
                let mom = m.moments(el, e, 3, 1.0).unwrap();
                let c = m.strength(el, e);
                let l = ln((2.0 + chi) / chi);
                let g0 = 2.0 * PI * c * l;
                let xi = 2.0 * PI * c * (2.0 - chi * l);
                assert!((mom.total() / g0 - 1.0).abs() < 1e-8);
                assert!((mom.xi1() / xi - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn moment_bounds_and_identity() {
        let m = ScatteringModel::default();
        for el in ElementId::ALL {
            for e in [1.0, 10.0, 80.0, 250.0] {
                let mom = m.moments(el, e, 12, 1e22).unwrap();
                let g0 = mom.total();
                assert!(g0 > 0.0);
                for gl in &mom.g {
                    assert!(gl.abs() <= g0 * (1.0 + 1e-12));
                }
                assert!(((g0 - mom.g[1]) / mom.xi1() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn squared_denominator_converges() {
        let m = ScatteringModel { denominator_power: 2.0, rutherford_prefactor: true, lab_frame: true };
        let mom = m.moments(ElementId::O, 80.0, 16, 3.3e22).unwrap();
        assert!(mom.g.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn dual_path_g0() {
        // Direct μ-quadrature of the kernel on a very fine graded mesh.
        let m = ScatteringModel::default();
        let (el, e, n) = (ElementId::C, 60.0, 1e22);
        let chi = m.screening(el, e);
        let gl = GaussLegendre::new(20);
        let mut total = 0.0;
        let mut hi = 1.0;
        let mut width = chi;
        while hi > -1.0 {
            let lo = (hi - width).max(-1.0);
            total += gl.integrate(lo, hi, |mu| m.dcs(el, e, mu, n));
            hi = lo;
            width *= 1.5;
        }
        let g0 = m.moments(el, e, 2, n).unwrap().total();
        assert!((2.0 * PI * total / g0 - 1.0).abs() < 1e-9);
    }

    const CHI_O_80_GOLDEN: f64 = 5.512_444_144_529_253e-10;
}
