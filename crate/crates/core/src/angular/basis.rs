use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;

use crate::math::{cos, sin, sqrt};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Real spherical harmonics up to degree N, flat index `p = ℓ² + ℓ + k` (0-based).
///
/// `m_ℓ^0 = N_ℓ^0 P_ℓ(μ)`, `m_ℓ^k = √2 N_ℓ^k P_ℓ^k(μ) cos(kφ)` and
/// `m_ℓ^{-k} = √2 N_ℓ^k P_ℓ^k(μ) sin(kφ)` for k > 0, with P_ℓ^k free of the
/// Condon–Shortley phase. Orthonormal on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnBasis {
    degree: usize,
}

impl PnBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of moments (N+1)².
    pub fn len(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(l: usize, k: isize) -> usize {
        debug_assert!(k.unsigned_abs() <= l);
        ((l * l + l) as isize + k) as usize
    }

    /// Inverse of [`PnBasis::index`].
    pub fn degree_order(p: usize) -> (usize, isize) {
        let l = sqrt(p as f64) as usize;
        // Guard against floating-point truncation at perfect squares.
        let l = if (l + 1) * (l + 1) <= p { l + 1 } else if l * l > p { l - 1 } else { l };
        (l, p as isize - (l * l + l) as isize)
    }

    /// Degree ℓ of every flat index.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.len()).map(|p| Self::degree_order(p).0).collect()
    }

    /// m(Ω) for a unit direction.
    pub fn eval(&self, omega: [f64; 3]) -> Result<Vec<f64>> {
        let norm2 = omega.iter().map(|c| c * c).sum::<f64>();
        if !((sqrt(norm2) - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::OutOfRange {
                quantity: "direction norm",
                value: sqrt(norm2),
                min: 1.0 - UNIT_TOL,
                max: 1.0 + UNIT_TOL,
            });
        }
        let mut out = vec![0.0; self.len()];
        self.eval_into(omega, &mut out);
        Ok(out)
    }

    /// Beam projection vector: the basis evaluated at the beam direction.
    pub fn nodal_to_modal(&self, omega: [f64; 3]) -> Result<Vec<f64>> {
        self.eval(omega)
    }

    fn eval_into(&self, omega: [f64; 3], out: &mut [f64]) {
        let n = self.degree;
        let mu = omega[2];
        let q = normalized_q(n, mu);
        // (Ω_x + iΩ_y)^k carries the (1−μ²)^{k/2} e^{ikφ} factor without a pole.
        let (mut re, mut im) = (1.0, 0.0);
        for k in 0..=n {
            for l in k..=n {
                let qv = q[qi(n, l, k)];
                if k == 0 {
                    out[Self::index(l, 0)] = qv;
                } else {
                    out[Self::index(l, k as isize)] = SQRT_2 * qv * re;
                    out[Self::index(l, -(k as isize))] = SQRT_2 * qv * im;
                }
            }
            let (r2, i2) = (re * omega[0] - im * omega[1], re * omega[1] + im * omega[0]);
            re = r2;
            im = i2;
        }
    }

    /// Values and scaled angular derivatives at (μ, φ):
    /// `√(1−μ²) ∂_μ m` and `∂_φ m / √(1−μ²)`. Both are smooth on the sphere.
    pub fn eval_with_gradient(&self, mu: f64, phi: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.degree;
        let m = self.len();
        let q = normalized_q(n, mu);
        let s2 = 1.0 - mu * mu;
        let s = sqrt(s2.max(0.0));
        let (mut val, mut dmu, mut dphi) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for k in 0..=n {
            let kf = k as f64;
            let sk = crate::math::powi(s, k as u32);
            let skm1 = if k == 0 { 0.0 } else { crate::math::powi(s, k as u32 - 1) };
            let (c, sn) = (cos(kf * phi), sin(kf * phi));
            for l in k..=n {
                let qv = q[qi(n, l, k)];
                // dQ̄_ℓ^k/dμ = √((ℓ+k+1)(ℓ−k)) Q̄_ℓ^{k+1}
                let dq = if l > k {
                    sqrt(((l + k + 1) * (l - k)) as f64) * q[qi(n, l, k + 1)]
                } else {
                    0.0
                };
                if k == 0 {
                    let p = Self::index(l, 0);
                    val[p] = qv;
                    dmu[p] = s * dq;
                } else {
                    let radial = SQRT_2 * sk * qv;
                    let radial_dmu = SQRT_2 * skm1 * (s2 * dq - kf * mu * qv);
                    let radial_over_s = SQRT_2 * skm1 * qv;
                    let pc = Self::index(l, k as isize);
                    let ps = Self::index(l, -(k as isize));
                    val[pc] = radial * c;
                    val[ps] = radial * sn;
                    dmu[pc] = radial_dmu * c;
                    dmu[ps] = radial_dmu * sn;
                    dphi[pc] = -kf * radial_over_s * sn;
                    dphi[ps] = kf * radial_over_s * c;
                }
            }
        }
        (val, dmu, dphi)
    }
}

#[inline]
fn qi(n: usize, l: usize, k: usize) -> usize {
    k * (n + 1) + l
}

/// Normalised Q̄_ℓ^k(μ) = N_ℓ^k d^k P_ℓ/dμ^k for 0 ≤ k ≤ ℓ ≤ n, stored at `qi(n, l, k)`.
/// Slots with k > ℓ hold zero.
fn normalized_q(n: usize, mu: f64) -> Vec<f64> {
    let mut q = vec![0.0; (n + 1) * (n + 2)];
    let mut diag = 1.0 / sqrt(4.0 * PI);
    for k in 0..=n {
        if k > 0 {
            diag *= sqrt((2 * k + 1) as f64 / (2 * k) as f64);
        }
        q[qi(n, k, k)] = diag;
        if k < n {
            q[qi(n, k + 1, k)] = sqrt((2 * k + 3) as f64) * mu * diag;
        }
        for l in (k + 2)..=n {
            let (lf, kf) = (l as f64, k as f64);
            let a = sqrt((4.0 * lf * lf - 1.0) / (lf * lf - kf * kf));
            let b = sqrt(((lf - 1.0) * (lf - 1.0) - kf * kf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0));
            q[qi(n, l, k)] = a * (mu * q[qi(n, l - 1, k)] - b * q[qi(n, l - 2, k)]);
        }
    }
    q
}

/// Product rule on the sphere: Gauss–Legendre in μ × uniform trapezoid in φ.
/// Exact for polynomials of degree < 2·`n_mu` in μ and trigonometric degree < `n_phi` in φ.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub points: Vec<(f64, f64, f64)>,
}

impl SphereQuadrature {
    pub fn product(n_mu: usize, n_phi: usize) -> Self {
        let gl = GaussLegendre::new(n_mu);
        let mut points = Vec::with_capacity(n_mu * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for (&mu, &wmu) in gl.nodes.iter().zip(&gl.weights) {
            for j in 0..n_phi {
                points.push((mu, (j as f64 + 0.5) * dphi, wmu * dphi));
            }
        }
        Self { points }
    }

    /// Sufficient to integrate products of two degree-N harmonics times a linear factor exactly.
    pub fn for_degree(n: usize) -> Self {
        Self::product(n + 3, 2 * n + 4)
    }

    pub fn direction(mu: f64, phi: f64) -> [f64; 3] {
        let s = sqrt((1.0 - mu * mu).max(0.0));
        [s * cos(phi), s * sin(phi), mu]
    }
}

/// Weak-form Laplace–Beltrami matrix ⟨m_p, Δ_S m_q⟩ = −∫ ∇m_p·∇m_q dΩ, by quadrature.
pub fn laplace_beltrami_matrix(basis: &PnBasis) -> Result<DMatrix<f64>> {
    let n = basis.degree();
    let m = basis.len();
    if n > 60 {
        return Err(Error::Config(format!("Laplace-Beltrami quadrature limited to N <= 60, got {n}")));
    }
    let quad = SphereQuadrature::product(n + 2, 2 * n + 4);
    let mut out = DMatrix::zeros(m, m);
    for &(mu, phi, w) in &quad.points {
        let (_, dmu, dphi) = basis.eval_with_gradient(mu, phi);
        for q in 0..m {
            for p in 0..m {
                out[(p, q)] -= w * (dmu[p] * dmu[q] + dphi[p] * dphi[q]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_roundtrip() {
        let b = PnBasis::new(9);
        let mut p = 0;
        for l in 0..=9usize {
            for k in -(l as isize)..=(l as isize) {
                assert_eq!(PnBasis::index(l, k), p);
                assert_eq!(PnBasis::degree_order(p), (l, k));
                p += 1;
            }
        }
        assert_eq!(p, b.len());
    }

    #[test]
    fn constant_entry() {
        let b = PnBasis::new(4);
        let v = b.eval([0.0, 0.6, 0.8]).unwrap();
        assert!((v[0] - 0.282_094_791_773_878_14).abs() < 1e-15);
        assert_eq!(v.len(), 25);
    }

    #[test]
    fn known_low_degree_values() {
        // m_1^{-1} ∝ y, m_1^0 ∝ z, m_1^1 ∝ x with factor √(3/4π).
        let b = PnBasis::new(1);
        let om = [0.48, 0.6, 0.64];
        let v = b.eval(om).unwrap();
        let c = sqrt(3.0 / (4.0 * PI));
        assert!((v[1] - c * om[1]).abs() < 1e-15);
        assert!((v[2] - c * om[2]).abs() < 1e-15);
        assert!((v[3] - c * om[0]).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unit() {
        assert!(PnBasis::new(2).eval([1.0, 1e-5, 0.0]).is_err());
    }

    #[test]
    fn gram_is_identity() {
        for n in [1usize, 5, 11, 20] {
            let b = PnBasis::new(n);
            let quad = SphereQuadrature::product(n + 2, 2 * n + 2);
            let m = b.len();
            let mut gram = DMatrix::<f64>::zeros(m, m);
            for &(mu, phi, w) in &quad.points {
                let v = b.eval(SphereQuadrature::direction(mu, phi)).unwrap();
                for q in 0..m {
                    for p in 0..m {
                        gram[(p, q)] += w * v[p] * v[q];
                    }
                }
            }
            let dev = (gram - DMatrix::identity(m, m)).amax();
            assert!(dev < 1e-10, "N={n}: {dev}");
        }
    }

    #[test]
    fn gradient_values_match_eval() {
        let b = PnBasis::new(6);
        let (mu, phi) = (0.3, 1.1);
        let (v, _, _) = b.eval_with_gradient(mu, phi);
        let w = b.eval(SphereQuadrature::direction(mu, phi)).unwrap();
        for (a, c) in v.iter().zip(&w) {
            assert!((a - c).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = PnBasis::new(5);
        let (mu, phi, h) = (-0.35, 2.2, 1e-6);
        let (_, dmu, dphi) = b.eval_with_gradient(mu, phi);
        let s = sqrt(1.0 - mu * mu);
        let f = |mu: f64, phi: f64| b.eval_with_gradient(mu, phi).0;
        let (a, c) = (f(mu + h, phi), f(mu - h, phi));
        let (d, e) = (f(mu, phi + h), f(mu, phi - h));
        for p in 0..b.len() {
            assert!((dmu[p] - s * (a[p] - c[p]) / (2.0 * h)).abs() < 1e-7);
            assert!((dphi[p] - (d[p] - e[p]) / (2.0 * h) / s).abs() < 1e-7);
        }
    }

    #[test]
    fn laplace_beltrami_is_diagonal() {
        let b = PnBasis::new(6);
        let lb = laplace_beltrami_matrix(&b).unwrap();
        for (p, &l) in b.degrees().iter().enumerate() {
            let expect = -((l * (l + 1)) as f64);
            for q in 0..b.len() {
                let target = if p == q { expect } else { 0.0 };
                assert!((lb[(p, q)] - target).abs() < 1e-10, "({p},{q})");
            }
        }
    }

    #[test]
    fn z_axis_projection_is_azimuthally_symmetric() {
        let b = PnBasis::new(7);
        let t = b.nodal_to_modal([0.0, 0.0, 1.0]).unwrap();
        for (p, v) in t.iter().enumerate() {
            if PnBasis::degree_order(p).1 != 0 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn full_turn_leaves_projection_unchanged(mu in -1.0f64..1.0, phi in 0.0f64..core::f64::consts::TAU) {
            let b = PnBasis::new(5);
            let a = b.nodal_to_modal(SphereQuadrature::direction(mu, phi)).unwrap();
            let c = b.nodal_to_modal(SphereQuadrature::direction(mu, phi + 2.0 * PI)).unwrap();
            for (x, y) in a.iter().zip(&c) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn addition_theorem(mu in -1.0f64..1.0, phi in 0.0f64..core::f64::consts::TAU) {
            // Σ_k m_ℓ^k(Ω)² = (2ℓ+1)/(4π)
            let b = PnBasis::new(8);
            let v = b.eval(SphereQuadrature::direction(mu, phi)).unwrap();
            for l in 0..=8usize {
                let s: f64 = (-(l as isize)..=(l as isize)).map(|k| v[PnBasis::index(l, k)].powi(2)).sum();
                prop_assert!((s - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
            }
        }
    }
}
