use alloc::format;

use nalgebra::DMatrix;

use super::stencil::UpwindStencils;
use crate::angular::FluxMatrices;
use crate::{Error, Result};

pub fn check_finite(what: &str, m: &DMatrix<f64>) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite entry in {what} at (row {}, column {})",
            pos % m.nrows(),
            pos / m.nrows()
        )));
    }
    Ok(())
}

/// Streaming right-hand side
/// `F_S(u) = −Σ_d [D_d⁺ (X V_d) Λ_d⁺ + D_d⁻ (X V_d) Λ_d⁻] V_dᵀ` with `X = 𝓢⁻¹u`.
///
/// Each characteristic variable of A_d is differenced against its own wind:
/// positive eigenvalues take the backward-biased stencil.
pub fn apply_streaming(
    u: &DMatrix<f64>,
    inv_stopping: &[f64],
    stencils: &UpwindStencils,
    flux: &FluxMatrices,
) -> Result<DMatrix<f64>> {
    let (n, m) = u.shape();
    if inv_stopping.len() != n || flux.len() != m {
        return Err(Error::Shape(format!(
            "streaming: state {n}x{m}, {} inverse stopping values, {} moments",
            inv_stopping.len(),
            flux.len()
        )));
    }
    check_finite("streaming input", u)?;
    let mut x = u.clone();
    for (mut row, &s) in x.row_iter_mut().zip(inv_stopping) {
        row *= s;
    }
    let mut out = DMatrix::zeros(n, m);
    for d in 0..3 {
        if stencils.plus[d].nnz() == 0 {
            continue;
        }
        let v = &flux.eigenvectors[d];
        let w = &x * v;
        let mut chars = DMatrix::zeros(n, m);
        for (q, &lam) in flux.eigenvalues[d].iter().enumerate() {
            let stencil = if lam > 0.0 {
                &stencils.plus[d]
            } else if lam < 0.0 {
                &stencils.minus[d]
            } else {
                continue;
            };
            let col = w.column(q);
            let mut dst = chars.column_mut(q);
            for i in 0..n {
                let mut acc = 0.0;
                for (c, val) in stencil.row(i) {
                    acc += val * col[c];
                }
                dst[i] = lam * acc;
            }
        }
        out.gemm(-1.0, &chars, &v.transpose(), 1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::PnBasis;
    use crate::spatial::{Boundary, Grid3D};
    use crate::math::{sin, cos};

    fn smooth_state(g: &Grid3D, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(g.len(), m, |i, q| {
            let c = g.center(i);
            sin(c[0] + 0.3 * q as f64) * cos(0.7 * c[1]) + 0.2 * sin(c[2] * (1.0 + q as f64 * 0.1))
        })
    }

    #[test]
    fn matches_dense_reference() {
        let g = Grid3D::new([8, 8, 8], [0.2, 0.25, 0.3], [0.0; 3]).unwrap();
        let basis = PnBasis::new(3);
        let flux = FluxMatrices::new(&basis);
        let st = UpwindStencils::new(&g, Boundary::Periodic).unwrap();
        let u = smooth_state(&g, basis.len());
        let inv_s: alloc::vec::Vec<f64> = (0..g.len()).map(|i| 1.0 / (10.0 + (i % 7) as f64)).collect();
        let got = apply_streaming(&u, &inv_s, &st, &flux).unwrap();
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inv_s.clone())) * &u;
        let mut reference = DMatrix::zeros(g.len(), basis.len());
        for d in 0..3 {
            reference -= st.plus[d].to_dense() * &x * &flux.a_plus[d] + st.minus[d].to_dense() * &x * &flux.a_minus[d];
        }
        let rel = (&got - &reference).norm() / reference.norm();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn linear_and_zero() {
        let g = Grid3D::new([5, 4, 3], [0.1; 3], [0.0; 3]).unwrap();
        let basis = PnBasis::new(2);
        let flux = FluxMatrices::new(&basis);
        let st = UpwindStencils::new(&g, Boundary::Vacuum).unwrap();
        let inv_s = alloc::vec![0.1; g.len()];
        let z = DMatrix::zeros(g.len(), basis.len());
        assert_eq!(apply_streaming(&z, &inv_s, &st, &flux).unwrap(), z);
        let u1 = smooth_state(&g, basis.len());
        let u2 = u1.map(|v| v * v - 0.3);
        let lhs = apply_streaming(&(&u1 * 2.0 - &u2 * 0.5), &inv_s, &st, &flux).unwrap();
        let rhs = apply_streaming(&u1, &inv_s, &st, &flux).unwrap() * 2.0
            - apply_streaming(&u2, &inv_s, &st, &flux).unwrap() * 0.5;
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_an_error() {
        let g = Grid3D::new([3, 3, 3], [0.1; 3], [0.0; 3]).unwrap();
        let basis = PnBasis::new(1);
        let flux = FluxMatrices::new(&basis);
        let st = UpwindStencils::new(&g, Boundary::Vacuum).unwrap();
        let mut u = DMatrix::zeros(27, 4);
        u[(5, 2)] = f64::NAN;
        assert!(matches!(apply_streaming(&u, &[1.0; 27], &st, &flux), Err(Error::Numerical(_))));
    }

    #[test]
    fn positive_characteristic_moves_downwind() {
        // A single characteristic of A_z with λ > 0 carrying a bump in z.
        let nz = 40;
        let g = Grid3D::new([1, 1, nz], [1.0, 1.0, 0.05], [0.0; 3]).unwrap();
        let basis = PnBasis::new(1);
        let flux = FluxMatrices::new(&basis);
        let st = UpwindStencils::new(&g, Boundary::Vacuum).unwrap();
        let (q, lam) = flux.eigenvalues[2]
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
        assert!(lam > 0.0);
        let v = flux.eigenvectors[2].column(q).into_owned();
        let bump: alloc::vec::Vec<f64> = (0..nz).map(|k| {
            let z = g.center(k)[2] - 1.0;
            if z.abs() < 0.25 { cos(2.0 * core::f64::consts::PI * z).powi(2) } else { 0.0 }
        }).collect();
        let u = DMatrix::from_fn(nz, basis.len(), |k, p| bump[k] * v[p]);
        let du = apply_streaming(&u, &alloc::vec![1.0; nz], &st, &flux).unwrap();
        let rate: alloc::vec::Vec<f64> = (0..nz).map(|k| (du.row(k) * &v)[0]).collect();
        let dt = 0.01;
        let new: alloc::vec::Vec<f64> = (0..nz).map(|k| bump[k] + dt * rate[k]).collect();
        let centroid = |f: &[f64]| {
            let s: f64 = f.iter().sum();
            f.iter().enumerate().map(|(k, v)| g.center(k)[2] * v).sum::<f64>() / s
        };
        assert!(centroid(&new) > centroid(&bump));
        // Upstream of the support nothing changes (up to eigenvector roundoff);
        // downstream only within the stencil width.
        let first = bump.iter().position(|b| *b > 0.0).unwrap();
        let last = bump.iter().rposition(|b| *b > 0.0).unwrap();
        assert!(first > 2 && last + 3 < nz);
        for k in (0..first).chain(last + 3..nz) {
            assert!(new[k].abs() < 1e-14, "cell {k}: {}", new[k]);
        }
        // Characteristic variables do not mix under the eigen-split.
        let mixed = &du - &du * &v * v.transpose();
        assert!(mixed.amax() < 1e-12);
    }

    #[test]
    fn eigen_rotation_round_trip() {
        let flux = FluxMatrices::new(&PnBasis::new(4));
        let g = Grid3D::new([3, 3, 3], [0.1; 3], [0.0; 3]).unwrap();
        let u = smooth_state(&g, 25);
        for d in 0..3 {
            let v = &flux.eigenvectors[d];
            assert!((&u * v * v.transpose() - &u).amax() < 1e-12);
        }
    }
}
