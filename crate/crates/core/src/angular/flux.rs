use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::basis::PnBasis;
use crate::math::sqrt;

type C64 = Complex<f64>;

/// Flux matrices `A_d = ∫ m mᵀ Ω_d dΩ` with their eigen-splittings
/// `A_d = V_d (Λ_d⁺ + Λ_d⁻) V_dᵀ` and `A_d^± = V_d Λ_d^± V_dᵀ`.
#[derive(Debug, Clone)]
pub struct FluxMatrices {
    pub a: [DMatrix<f64>; 3],
    pub eigenvectors: [DMatrix<f64>; 3],
    pub eigenvalues: [DVector<f64>; 3],
    pub a_plus: [DMatrix<f64>; 3],
    pub a_minus: [DMatrix<f64>; 3],
}

impl FluxMatrices {
    pub fn new(basis: &PnBasis) -> Self {
        let a = assemble(basis);
        let mut eigenvectors: [DMatrix<f64>; 3] = Default::default();
        let mut eigenvalues: [DVector<f64>; 3] = Default::default();
        let mut a_plus: [DMatrix<f64>; 3] = Default::default();
        let mut a_minus: [DMatrix<f64>; 3] = Default::default();
        for d in 0..3 {
            let eig = SymmetricEigen::new(a[d].clone());
            let v = eig.eigenvectors;
            let lam = eig.eigenvalues;
            let plus = DVector::from_iterator(lam.len(), lam.iter().map(|&l| l.max(0.0)));
            let minus = DVector::from_iterator(lam.len(), lam.iter().map(|&l| l.min(0.0)));
            a_plus[d] = &v * DMatrix::from_diagonal(&plus) * v.transpose();
            a_minus[d] = &v * DMatrix::from_diagonal(&minus) * v.transpose();
            eigenvectors[d] = v;
            eigenvalues[d] = lam;
        }
        Self { a, eigenvectors, eigenvalues, a_plus, a_minus }
    }

    pub fn len(&self) -> usize {
        self.a[0].nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest |λ| over all three directions.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .flat_map(|l| l.iter())
            .fold(0.0f64, |m, l| m.max(l.abs()))
    }
}

/// Sparse function expansion in the orthonormal complex basis E_ℓ^k (same flat index as the real basis).
type Expansion = Vec<(usize, C64)>;

fn real_in_complex(l: usize, k: isize) -> Expansion {
    let h = FRAC_1_SQRT_2;
    let kk = k.unsigned_abs() as isize;
    let pos = PnBasis::index(l, kk);
    let neg = PnBasis::index(l, -kk);
    if k == 0 {
        vec![(pos, C64::new(1.0, 0.0))]
    } else if k > 0 {
        vec![(pos, C64::new(h, 0.0)), (neg, C64::new(h, 0.0))]
    } else {
        // (E^κ − E^{−κ}) / (√2 i)
        vec![(pos, C64::new(0.0, -h)), (neg, C64::new(0.0, h))]
    }
}

fn alpha(l: usize, k: usize) -> f64 {
    let (l, k) = (l as f64, k as f64);
    sqrt(((l + 1.0) * (l + 1.0) - k * k) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)))
}

// Ladder coefficients of w = Ω_x + iΩ_y acting on the phase-free complex harmonics.
fn p_coef(l: usize, k: usize) -> f64 {
    let (l, k) = (l as f64, k as f64);
    sqrt((l + k + 1.0) * (l + k + 2.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)))
}
fn q_coef(l: usize, k: usize) -> f64 {
    if l < k + 2 {
        return 0.0;
    }
    let (l, k) = (l as f64, k as f64);
    sqrt((l - k) * (l - k - 1.0) / ((2.0 * l - 1.0) * (2.0 * l + 1.0)))
}
fn r_coef(l: usize, k: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let (l, k) = (l as f64, k as f64);
    sqrt((l + k) * (l + k - 1.0) / ((2.0 * l - 1.0) * (2.0 * l + 1.0)))
}
fn s_coef(l: usize, k: usize) -> f64 {
    let (l, k) = (l as f64, k as f64);
    sqrt((l - k + 1.0) * (l - k + 2.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)))
}

/// Multiplies an expansion by w (`conj = false`) or by w̄ (`conj = true`), truncated at degree `n`.
fn apply_ladder(f: &Expansion, n: usize, conj: bool) -> Expansion {
    let mut out = Vec::new();
    let mut push = |l: isize, k: isize, c: C64| {
        if l >= 0 && (l as usize) <= n && k.unsigned_abs() <= l as usize && c != C64::new(0.0, 0.0) {
            out.push((PnBasis::index(l as usize, k), c));
        }
    };
    for &(e, c) in f {
        let (l, k) = PnBasis::degree_order(e);
        let li = l as isize;
        // Raising (w on k ≥ 0, w̄ on k ≤ 0) moves |k| up; lowering moves it down.
        let raising = if conj { k <= 0 } else { k >= 0 };
        let a = k.unsigned_abs();
        let sign = if conj { -1 } else { 1 };
        if raising {
            let knew = sign * (a as isize + 1);
            push(li + 1, knew, c * p_coef(l, a));
            push(li - 1, knew, -c * q_coef(l, a));
        } else {
            let knew = -sign * (a as isize - 1);
            push(li - 1, knew, c * r_coef(l, a));
            push(li + 1, knew, -c * s_coef(l, a));
        }
    }
    out
}

fn apply_mu(f: &Expansion, n: usize) -> Expansion {
    let mut out = Vec::new();
    for &(e, c) in f {
        let (l, k) = PnBasis::degree_order(e);
        let a = k.unsigned_abs();
        if l < n {
            out.push((PnBasis::index(l + 1, k), c * alpha(l, a)));
        }
        if l >= 1 && a < l {
            out.push((PnBasis::index(l - 1, k), c * alpha(l - 1, a)));
        }
    }
    out
}

fn assemble(basis: &PnBasis) -> [DMatrix<f64>; 3] {
    let n = basis.degree();
    let m = basis.len();
    let mut a: [DMatrix<f64>; 3] = [DMatrix::zeros(m, m), DMatrix::zeros(m, m), DMatrix::zeros(m, m)];
    let real: Vec<Expansion> = (0..m)
        .map(|p| {
            let (l, k) = PnBasis::degree_order(p);
            real_in_complex(l, k)
        })
        .collect();
    let mut dense = vec![C64::new(0.0, 0.0); m];
    for q in 0..m {
        let up = apply_ladder(&real[q], n, false);
        let down = apply_ladder(&real[q], n, true);
        let half = C64::new(0.5, 0.0);
        let neg_half_i = C64::new(0.0, -0.5);
        // Ω_x = (w + w̄)/2, Ω_y = (w − w̄)/(2i), Ω_z = μ
        let products: [Expansion; 3] = [
            up.iter().map(|&(e, c)| (e, c * half)).chain(down.iter().map(|&(e, c)| (e, c * half))).collect(),
            up.iter()
                .map(|&(e, c)| (e, c * neg_half_i))
                .chain(down.iter().map(|&(e, c)| (e, -c * neg_half_i)))
                .collect(),
            apply_mu(&real[q], n),
        ];
        for (d, prod) in products.iter().enumerate() {
            dense.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for &(e, c) in prod {
                dense[e] += c;
            }
            for p in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for &(e, c) in &real[p] {
                    acc += c.conj() * dense[e];
                }
                debug_assert!(acc.im.abs() < 1e-12);
                a[d][(p, q)] = acc.re;
            }
        }
    }
    a
}
